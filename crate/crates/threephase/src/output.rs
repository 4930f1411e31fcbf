//! CSV grids, JSON sidecars and gnuplot scripts.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};
use threephase_core::solution::{FieldGrid, GridPlane};

use crate::config::RunConfig;
use crate::report::wave_json;
use crate::{CliError, Resolved};

/// 17 significant digits in scientific notation.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn axis_names(grid: &FieldGrid) -> [&'static str; 2] {
    match grid.spec.plane {
        GridPlane::XZ { .. } => ["x", "z"],
        GridPlane::XT { .. } => ["x", "t"],
    }
}

/// Rows run over x fastest, then the second axis.
pub fn write_csv<W: std::io::Write>(grid: &FieldGrid, out: W) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    let [a, b] = axis_names(grid);
    w.write_record([a, b, "value"]).map_err(io)?;
    for iy in 0..grid.spec.y.count {
        let y = format_value(grid.spec.y.value(iy));
        for ix in 0..grid.spec.x.count {
            w.write_record([format_value(grid.spec.x.value(ix)), y.clone(), format_value(grid.get(ix, iy))])
                .map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn sidecar(grid: &FieldGrid, cfg: &RunConfig, resolved: &Resolved) -> Value {
    let p = &grid.params;
    let generated = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let [a, b] = axis_names(grid);
    json!({
        "library": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "generated_unix_seconds": generated,
        "field": grid.field.name(),
        "columns": [a, b, "value"],
        "params": {
            "a": p.a(), "b": p.b(), "phi": p.phi(), "lambda0": p.lambda0(), "alpha": p.alpha(),
            "lambda0_expr": cfg.lambda0.to_string(),
        },
        "wave": wave_json(&grid.wave),
        "grid": cfg.grid,
        "tolerances": cfg.tolerances,
        "nome_convention": cfg.nome,
        "scale_fit_variation": resolved.solution.scale.variation,
    })
}

pub fn plot_script(csv_name: &str, grid: &FieldGrid) -> String {
    let [a, b] = axis_names(grid);
    format!(
        "# gnuplot -p {stem}.gp\nset datafile separator ','\nset xlabel '{a}'\nset ylabel '{b}'\n\
         set pm3d map\nset dgrid3d {ny},{nx}\nsplot '{csv_name}' skip 1 using 1:2:3 with pm3d title '{field}'\n",
        stem = csv_name.trim_end_matches(".csv"),
        ny = grid.spec.y.count,
        nx = grid.spec.x.count,
        field = grid.field.name(),
    )
}

/// Writes `<stem>.csv`, `<stem>.json` and optionally `<stem>.gp`; returns the paths.
pub fn write_outputs(grid: &FieldGrid, cfg: &RunConfig, resolved: &Resolved) -> Result<Vec<PathBuf>, CliError> {
    let dir = &cfg.output.dir;
    let io = |p: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let stem = &cfg.output.stem;
    let csv_path = dir.join(format!("{stem}.csv"));
    let file = fs::File::create(&csv_path).map_err(|e| io(&csv_path, e))?;
    write_csv(grid, std::io::BufWriter::new(file))?;
    let json_path = dir.join(format!("{stem}.json"));
    let text = serde_json::to_string_pretty(&sidecar(grid, cfg, resolved)).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(&json_path, text + "\n").map_err(|e| io(&json_path, e))?;
    let mut paths = vec![csv_path, json_path];
    if cfg.output.plot_script {
        let gp = dir.join(format!("{stem}.gp"));
        fs::write(&gp, plot_script(&format!("{stem}.csv"), grid)).map_err(|e| io(&gp, e))?;
        paths.push(gp);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_carry_seventeen_digits() {
        let s = format_value(std::f64::consts::PI);
        assert_eq!(s, "3.1415926535897931e0");
        assert_eq!(s.parse::<f64>().unwrap(), std::f64::consts::PI);
        for v in [1e-300, -2.5e17, 0.1 + 0.2, f64::MIN_POSITIVE] {
            assert_eq!(format_value(v).parse::<f64>().unwrap(), v);
        }
    }
}
