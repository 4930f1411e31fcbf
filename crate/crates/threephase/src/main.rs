use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use threephase::checks::{run_suite, SuiteOptions};
use threephase::config::{NomeTag, Overrides, RunConfig};
use threephase::output::write_outputs;
use threephase::parallel::par_grid_eval;
use threephase::report::periods_document;
use threephase::{solve_config, CliError};

#[derive(Parser, Debug)]
#[command(name = "threephase", version, about = "Three-phase solutions of NLS, KP-I and Hirota on a genus-3 curve")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print periods, reduction constants, B, C, wave data and lattice edges as JSON
    Periods(Common),
    /// Evaluate the configured field on a grid and write CSV + JSON sidecar
    Eval(Common),
    /// Run the acceptance criteria AC-1..AC-8
    Verify {
        #[command(flatten)]
        common: Common,
        /// Multiply the fitted amplitude scale before the residual checks (test-only)
        #[arg(long = "corrupt-A", value_name = "FACTOR", default_value_t = 1.0)]
        corrupt_a: f64,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// JSON configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Figure preset (fig6..fig13, hirota-l0, hirota-l4, hirota-k2-4k1, hirota-k2-4k3)
    #[arg(long)]
    preset: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Quadrature tolerance
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum)]
    nome_convention: Option<NomeTag>,
    /// Cross-check lattice edges by the closed form
    #[arg(long)]
    paranoid: bool,
}

impl Common {
    fn load(&self) -> Result<RunConfig, CliError> {
        let flags = Overrides { out: self.out.clone(), tol: self.tol, nome: self.nome_convention, paranoid: self.paranoid };
        RunConfig::load(self.preset.as_deref(), self.config.as_deref(), &flags)
    }
}

fn periods(c: &Common) -> Result<(), CliError> {
    let cfg = c.load()?;
    let resolved = solve_config(&cfg)?;
    let text = serde_json::to_string_pretty(&periods_document(&cfg, &resolved)).map_err(|e| CliError::Io(e.to_string()))?;
    println!("{text}");
    if c.out.is_some() {
        std::fs::create_dir_all(&cfg.output.dir)?;
        std::fs::write(cfg.output.dir.join("periods.json"), text + "\n")?;
    }
    Ok(())
}

fn eval(c: &Common) -> Result<(), CliError> {
    let cfg = c.load()?;
    let resolved = solve_config(&cfg)?;
    let s = &resolved.solution;
    let grid = par_grid_eval(cfg.field.kind(), &cfg.grid.spec(), &s.params, &s.wave, cfg.tolerances.theta)?;
    for p in write_outputs(&grid, &cfg, &resolved)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn verify(c: &Common, corrupt_a: f64) -> Result<(), CliError> {
    let cfg = c.load()?;
    if !(corrupt_a.is_finite() && corrupt_a > 0.0) {
        return Err(CliError::Config(format!("--corrupt-A must be positive (got {corrupt_a})")));
    }
    let report = run_suite(&SuiteOptions::from_config(&cfg, corrupt_a));
    for line in report.lines() {
        println!("{line}");
    }
    if report.all_passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = report.outcomes.iter().filter(|o| !o.passed()).map(|o| o.id).collect();
        Err(CliError::Verification(failed.join(", ")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Periods(c) => periods(c),
        Command::Eval(c) => eval(c),
        Command::Verify { common, corrupt_a } => verify(common, *corrupt_a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("threephase: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
