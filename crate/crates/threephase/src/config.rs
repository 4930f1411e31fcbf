//! Run configuration: defaults, presets, JSON files and flag overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use threephase_core::curve::{CurveParams, Validation};
use threephase_core::periods::NomeConvention;
use threephase_core::pipeline::{Lambda0Spec, SolveOptions};
use threephase_core::reference;
use threephase_core::solution::{Axis, FieldKind, GridPlane, GridSpec};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsConfig,
    /// A number, or "k2/(4k1)" / "k2/(4k3)".
    pub lambda0: Lambda0Expr,
    pub field: FieldTag,
    pub grid: GridConfig,
    pub tolerances: Tolerances,
    pub nome: NomeTag,
    pub paranoid: bool,
    pub z0: [f64; 3],
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ParamsConfig::default(),
            lambda0: Lambda0Expr::Value(0.0),
            field: FieldTag::KpiU,
            grid: GridConfig::default(),
            tolerances: Tolerances::default(),
            nome: NomeTag::Pi,
            paranoid: false,
            z0: [0.0; 3],
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    pub a: f64,
    pub b: f64,
    pub phi: f64,
    pub alpha: f64,
    /// Accept φ ∈ (0, π/4] as well.
    pub relaxed_angle: bool,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        ParamsConfig {
            a: reference::A,
            b: reference::B,
            phi: reference::PHI,
            alpha: reference::HIROTA_ALPHA,
            relaxed_angle: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda0Expr {
    Value(f64),
    K2Over4K1,
    K2Over4K3,
}

impl Lambda0Expr {
    pub fn spec(&self) -> Lambda0Spec {
        match self {
            Lambda0Expr::Value(v) => Lambda0Spec::Value(*v),
            Lambda0Expr::K2Over4K1 => Lambda0Spec::K2Over4K1,
            Lambda0Expr::K2Over4K3 => Lambda0Spec::K2Over4K3,
        }
    }
}

impl fmt::Display for Lambda0Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lambda0Expr::Value(v) => write!(f, "{v}"),
            Lambda0Expr::K2Over4K1 => f.write_str("k2/(4k1)"),
            Lambda0Expr::K2Over4K3 => f.write_str("k2/(4k3)"),
        }
    }
}

impl std::str::FromStr for Lambda0Expr {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match compact.as_str() {
            "k2/(4k1)" => Ok(Lambda0Expr::K2Over4K1),
            "k2/(4k3)" => Ok(Lambda0Expr::K2Over4K3),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Lambda0Expr::Value)
                .ok_or_else(|| format!("lambda0 must be a number, \"k2/(4k1)\" or \"k2/(4k3)\" (got {s:?})")),
        }
    }
}

impl Serialize for Lambda0Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Lambda0Expr::Value(v) => s.serialize_f64(*v),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Lambda0Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Lambda0Expr::Value(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FieldTag {
    KpiU,
    NlsAmp2,
    HirotaAmp2,
}

impl FieldTag {
    pub fn kind(&self) -> FieldKind {
        match self {
            FieldTag::KpiU => FieldKind::KpiU,
            FieldTag::NlsAmp2 => FieldKind::NlsAmp2,
            FieldTag::HirotaAmp2 => FieldKind::HirotaAmp2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum NomeTag {
    Pi,
    Plain,
}

impl NomeTag {
    pub fn convention(&self) -> NomeConvention {
        match self {
            NomeTag::Pi => NomeConvention::Pi,
            NomeTag::Plain => NomeConvention::Plain,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisConfig {
    fn axis(&self) -> Axis {
        Axis { min: self.min, max: self.max, count: self.count }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaneTag {
    /// (x, z) at fixed t.
    Xz,
    /// (x, t) at fixed z.
    Xt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub plane: PlaneTag,
    /// Value of the coordinate held fixed (t for `xz`, z for `xt`).
    pub fixed: f64,
    pub x: AxisConfig,
    pub y: AxisConfig,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            plane: PlaneTag::Xz,
            fixed: 0.0,
            x: AxisConfig { min: -10.0, max: 10.0, count: 401 },
            y: AxisConfig { min: -3.0, max: 3.0, count: 241 },
        }
    }
}

impl GridConfig {
    pub fn spec(&self) -> GridSpec {
        let plane = match self.plane {
            PlaneTag::Xz => GridPlane::XZ { t: self.fixed },
            PlaneTag::Xt => GridPlane::XT { z: self.fixed },
        };
        GridSpec { x: self.x.axis(), y: self.y.axis(), plane }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Absolute tolerance of every contour integral.
    pub quad: f64,
    /// Truncation tolerance of theta series.
    pub theta: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { quad: 1e-12, theta: 1e-15 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// File name stem for the CSV, sidecar and plot script.
    pub stem: String,
    pub plot_script: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out"), stem: "field".into(), plot_script: true }
    }
}

/// Command-line values that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub nome: Option<NomeTag>,
    pub paranoid: bool,
}

impl RunConfig {
    /// Layers a preset (replacing the built-in defaults), then the JSON
    /// file, then flag overrides.
    pub fn load(preset: Option<&str>, file: Option<&Path>, flags: &Overrides) -> Result<Self, CliError> {
        let base = match preset {
            Some(name) => crate::presets::preset(name)?,
            None => RunConfig::default(),
        };
        let mut cfg = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                let patch: Value =
                    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                base.merged(patch)?
            }
            None => base,
        };
        if let Some(out) = &flags.out {
            cfg.output.dir = out.clone();
        }
        if let Some(tol) = flags.tol {
            cfg.tolerances.quad = tol;
        }
        if let Some(nome) = flags.nome {
            cfg.nome = nome;
        }
        cfg.paranoid |= flags.paranoid;
        cfg.check()?;
        Ok(cfg)
    }

    /// Overlays a partial JSON document on this configuration.
    pub fn merged(&self, patch: Value) -> Result<Self, CliError> {
        let mut doc = serde_json::to_value(self).map_err(|e| CliError::Config(e.to_string()))?;
        merge(&mut doc, patch);
        serde_json::from_value(doc).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Checks everything that does not need the solver.
    pub fn check(&self) -> Result<(), CliError> {
        for (name, v) in [("tolerances.quad", self.tolerances.quad), ("tolerances.theta", self.tolerances.theta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("{name} must be positive (got {v})")));
            }
        }
        self.params()?;
        self.grid.spec().validate(self.field.kind()).map_err(|e| CliError::Config(e.to_string()))?;
        if !self.grid.fixed.is_finite() || self.z0.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Config("grid.fixed and z0 must be finite".into()));
        }
        Ok(())
    }

    /// Curve parameters with λ0 = 0; symbolic λ0 is resolved by the solver.
    pub fn params(&self) -> Result<CurveParams, CliError> {
        let p = &self.params;
        let mode = if p.relaxed_angle { Validation::Relaxed } else { Validation::Strict };
        let lambda0 = match self.lambda0 {
            Lambda0Expr::Value(v) => v,
            _ => 0.0,
        };
        CurveParams::validate(p.a, p.b, p.phi, lambda0, p.alpha, mode).map_err(|e| CliError::Validation(e.to_string()))
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            quad_tol: self.tolerances.quad,
            theta_eps: self.tolerances.theta,
            nome: self.nome.convention(),
            paranoid: self.paranoid,
            z0: self.z0,
            ..SolveOptions::default()
        }
    }
}

fn merge(doc: &mut Value, patch: Value) {
    match (doc, patch) {
        (Value::Object(d), Value::Object(p)) => {
            for (k, v) in p {
                match d.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        d.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda0_expressions_parse() {
        assert_eq!("k2/(4k1)".parse::<Lambda0Expr>().unwrap(), Lambda0Expr::K2Over4K1);
        assert_eq!(" k2 / (4k3) ".parse::<Lambda0Expr>().unwrap(), Lambda0Expr::K2Over4K3);
        assert_eq!("4".parse::<Lambda0Expr>().unwrap(), Lambda0Expr::Value(4.0));
        assert!("k1/k2".parse::<Lambda0Expr>().is_err());
        assert!("nan".parse::<Lambda0Expr>().is_err());
    }

    #[test]
    fn defaults_round_trip_through_json() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn partial_file_only_touches_its_keys() {
        let cfg = RunConfig::default();
        let patch = serde_json::json!({"lambda0": "k2/(4k1)", "grid": {"x": {"min": 0.0, "max": 1.0, "count": 3}}});
        let m = cfg.merged(patch).unwrap();
        assert_eq!(m.lambda0, Lambda0Expr::K2Over4K1);
        assert_eq!(m.grid.x.count, 3);
        assert_eq!(m.grid.y, cfg.grid.y);
        assert_eq!(m.params, cfg.params);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::default().merged(serde_json::json!({"grdi": {}})).unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
    }

    #[test]
    fn flags_beat_file() {
        let dir = std::env::temp_dir().join(format!("threephase-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        std::fs::write(&path, r#"{"tolerances": {"quad": 1e-10}, "nome": "plain"}"#).unwrap();
        let flags = Overrides { tol: Some(1e-11), ..Overrides::default() };
        let cfg = RunConfig::load(None, Some(&path), &flags).unwrap();
        assert_eq!(cfg.tolerances.quad, 1e-11);
        assert_eq!(cfg.nome, NomeTag::Plain);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let bad_angle = RunConfig { params: ParamsConfig { phi: 0.1, ..ParamsConfig::default() }, ..RunConfig::default() };
        assert!(matches!(bad_angle.check(), Err(CliError::Validation(_))));
        let relaxed = RunConfig {
            params: ParamsConfig { phi: 0.1, relaxed_angle: true, ..ParamsConfig::default() },
            ..RunConfig::default()
        };
        assert!(relaxed.check().is_ok());
        let mut empty = RunConfig::default();
        empty.grid.x.max = empty.grid.x.min;
        assert!(matches!(empty.check(), Err(CliError::Config(_))));
        let mut tol = RunConfig::default();
        tol.tolerances.quad = 0.0;
        assert!(matches!(tol.check(), Err(CliError::Config(_))));
    }
}
