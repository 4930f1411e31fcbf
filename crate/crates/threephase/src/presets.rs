//! Named figure presets on the reference parameter set.

use crate::config::{AxisConfig, FieldTag, GridConfig, Lambda0Expr, OutputConfig, PlaneTag, RunConfig};
use crate::CliError;

pub const NAMES: [&str; 12] = [
    "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12", "fig13",
    "hirota-l0", "hirota-l4", "hirota-k2-4k1", "hirota-k2-4k3",
];

/// KP-I snapshot times of the fig presets.
pub const SNAPSHOT_TIMES: [f64; 4] = [0.0, 0.1, 0.2, 0.3];

pub fn preset(name: &str) -> Result<RunConfig, CliError> {
    let kp = |lambda0, t| RunConfig {
        lambda0,
        field: FieldTag::KpiU,
        grid: GridConfig { plane: PlaneTag::Xz, fixed: t, ..GridConfig::default() },
        output: OutputConfig { stem: name.to_string(), ..OutputConfig::default() },
        ..RunConfig::default()
    };
    let hirota = |lambda0| RunConfig {
        lambda0,
        field: FieldTag::HirotaAmp2,
        grid: GridConfig {
            plane: PlaneTag::Xt,
            fixed: 0.0,
            x: AxisConfig { min: -10.0, max: 10.0, count: 401 },
            y: AxisConfig { min: 0.0, max: 6.0, count: 241 },
        },
        output: OutputConfig { stem: name.to_string(), ..OutputConfig::default() },
        ..RunConfig::default()
    };
    let cfg = match name {
        "fig6" | "fig7" | "fig8" | "fig9" => {
            let i = name[3..].parse::<usize>().unwrap() - 6;
            kp(Lambda0Expr::Value(0.0), SNAPSHOT_TIMES[i])
        }
        "fig10" | "fig11" | "fig12" | "fig13" => {
            let i = name[3..].parse::<usize>().unwrap() - 10;
            kp(Lambda0Expr::K2Over4K1, SNAPSHOT_TIMES[i])
        }
        "hirota-l0" => hirota(Lambda0Expr::Value(0.0)),
        "hirota-l4" => hirota(Lambda0Expr::Value(4.0)),
        "hirota-k2-4k1" => hirota(Lambda0Expr::K2Over4K1),
        "hirota-k2-4k3" => hirota(Lambda0Expr::K2Over4K3),
        other => {
            return Err(CliError::Config(format!("unknown preset {other:?}; known: {}", NAMES.join(", "))));
        }
    };
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_resolves_and_validates() {
        for n in NAMES {
            let cfg = preset(n).unwrap();
            cfg.check().unwrap();
            assert_eq!(cfg.output.stem, n);
        }
        assert!(preset("fig14").is_err());
    }

    #[test]
    fn captions_are_encoded() {
        assert_eq!(preset("fig6").unwrap().grid.fixed, 0.0);
        assert_eq!(preset("fig9").unwrap().grid.fixed, 0.3);
        assert_eq!(preset("fig11").unwrap().lambda0, Lambda0Expr::K2Over4K1);
        let h = preset("hirota-l4").unwrap();
        assert_eq!(h.lambda0, Lambda0Expr::Value(4.0));
        assert_eq!(h.params.alpha, 0.1);
        assert_eq!(h.field, FieldTag::HirotaAmp2);
        assert_eq!(preset("hirota-k2-4k3").unwrap().lambda0, Lambda0Expr::K2Over4K3);
    }
}
