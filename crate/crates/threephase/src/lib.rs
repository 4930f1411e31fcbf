//! Command-line front end for `threephase-core`: configuration, figure
//! presets, CSV/JSON output, parallel grid evaluation and the acceptance
//! checks behind `threephase verify`.

pub mod checks;
pub mod config;
pub mod output;
pub mod parallel;
pub mod presets;
pub mod report;

use threephase_core::pipeline::{resolve_lambda0, solve, Solution};
use threephase_core::quadrature::QuadratureError;
use threephase_core::solution::SolutionError;
use threephase_core::theta::ThetaError;
use threephase_core::Error;

use crate::config::RunConfig;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CliError {
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid parameters: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) | CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Curve(_) => CliError::Validation(msg),
            Error::Solution(SolutionError::InvalidGrid(_) | SolutionError::InvalidEps(_))
            | Error::Theta(ThetaError::InvalidEps(_))
            | Error::Quadrature(QuadratureError::InvalidTolerance(_)) => CliError::Config(msg),
            _ => CliError::Numerical(msg),
        }
    }
}

impl From<SolutionError> for CliError {
    fn from(e: SolutionError) -> Self {
        Error::from(e).into()
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Solution for a configuration, with symbolic λ0 resolved.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub solution: Solution,
    /// Relative change of k_j between λ0 = 0 and the resolved λ0.
    pub k_change: f64,
}

pub fn solve_config(cfg: &RunConfig) -> Result<Resolved, CliError> {
    let opts = cfg.solve_options();
    let (params, k_change) = resolve_lambda0(&cfg.params()?, cfg.lambda0.spec(), &opts)?;
    let solution = solve(&params, &opts)?;
    Ok(Resolved { solution, k_change })
}
