//! `tavis`: parameter sweeps, figure data and the validation suite on top
//! of `tavis-core`.
//!
//! Configuration is a JSON document layered over per-command defaults.
//! Any field can be overridden from the command line by its dotted path,
//! with `-` standing for `_`: `--params.g-hz 2e6`, `--grid.n-bar.max 1e4`.

pub mod config;
pub mod error;
pub mod figures;
pub mod sweep;
pub mod table;
pub mod validate;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{Format, Globals, Override, ScanConfig};
pub use crate::error::{CliError, Result};
use crate::table::Report;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// QFI of the configured scenario over the grid.
    Qfi,
    /// Error-propagation precision at the optimal quadrature.
    Precision,
    /// QFI and precision together.
    Scan,
    /// Coherent-light precision and QFI versus n̄.
    Fig2,
    /// ln(F/t²) of displaced squeezed vacuum over |α|² and sinh²r.
    Fig3,
    /// Sign of ∂F/∂sinh²r over (sinh²r, τ) and its zero contour.
    Fig4a,
    /// Photon-number variance and its lower bounds versus sinh²r.
    Fig4b,
    /// Oracle-equivalence suite; exits 2 when a residual exceeds tolerance.
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Qfi => "qfi",
            Command::Precision => "precision",
            Command::Scan => "scan",
            Command::Fig2 => "fig2",
            Command::Fig3 => "fig3",
            Command::Fig4a => "fig4a",
            Command::Fig4b => "fig4b",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tavis", version, about = "Magnetometry QFI sweeps and figure data for the dispersive Tavis-Cummings model")]
#[command(after_help = "Config fields can be overridden by dotted path, e.g. --params.g-hz 2e6 --grid.n-bar.points 30")]
pub struct Cli {
    /// JSON config file (or a .meta.json sidecar from an earlier run).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output path; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for grid evaluation.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

const CLAP_FLAGS: [&str; 7] = ["config", "out", "format", "threads", "seed", "help", "version"];

/// Separates `--dotted.path value` overrides from the arguments clap sees.
pub fn split_args(args: &[String]) -> Result<(Vec<String>, Vec<Override>)> {
    let mut passthrough = Vec::new();
    let mut overrides = Vec::new();
    let mut it = args.iter();
    if let Some(program) = it.next() {
        passthrough.push(program.clone());
    }
    while let Some(arg) = it.next() {
        let Some(flag) = arg.strip_prefix("--").filter(|f| !f.is_empty()) else {
            passthrough.push(arg.clone());
            continue;
        };
        let (name, inline) = match flag.split_once('=') {
            Some((n, v)) => (n, Some(v.to_string())),
            None => (flag, None),
        };
        if CLAP_FLAGS.contains(&name) {
            passthrough.push(arg.clone());
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => it.next().cloned().ok_or_else(|| CliError::Config(format!("--{name} needs a value")))?,
        };
        overrides.push(Override::parse(name, &value)?);
    }
    Ok((passthrough, overrides))
}

/// Computes a table-producing command.
pub fn compute(command: Command, cfg: &ScanConfig) -> Result<Report> {
    match command {
        Command::Qfi | Command::Precision | Command::Scan => sweep::run(command, cfg),
        Command::Fig2 => figures::fig2(cfg),
        Command::Fig3 => figures::fig3(cfg),
        Command::Fig4a => figures::fig4a(cfg),
        Command::Fig4b => figures::fig4b(cfg),
        Command::Validate => Err(CliError::Internal("validate produces a report, not a table".into())),
    }
}

pub fn run(cli: &Cli, overrides: &[Override]) -> Result<()> {
    // grid points are the unit of parallelism; keep dense kernels serial so
    // results do not depend on the thread count
    faer::set_global_parallelism(faer::Par::Seq);
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let globals = Globals { config: cli.config.clone(), out: cli.out.clone(), format: cli.format, seed: cli.seed };
    let cfg = config::resolve(cli.command, &globals, overrides)?;
    match cli.command {
        Command::Validate => {
            let report = validate::run(&cfg)?;
            table::emit_json(&cfg, &report)?;
            if report["passed"] == serde_json::Value::Bool(false) {
                let failed: Vec<&str> = report["checks"]
                    .as_array()
                    .into_iter()
                    .flatten()
                    .filter(|c| c["passed"] == serde_json::Value::Bool(false))
                    .filter_map(|c| c["name"].as_str())
                    .collect();
                return Err(CliError::Tolerance(format!("failed checks: {}", failed.join(", "))));
            }
            Ok(())
        }
        command => table::emit(command, &cfg, &compute(command, &cfg)?),
    }
}

/// Entry point behind the binary; returns the process exit status.
pub fn main_with_args(args: Vec<String>) -> i32 {
    let (clap_args, overrides) = match split_args(&args) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(clap_args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli, &overrides) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn overrides_are_split_from_clap_flags() {
        let (rest, o) = split_args(&args("tavis fig2 --seed 3 --params.g-hz 2e6 --grid.n-bar.points=7 --out x.csv")).unwrap();
        assert_eq!(rest, args("tavis fig2 --seed 3 --out x.csv"));
        assert_eq!(o.len(), 2);
        assert_eq!(o[1].path, vec!["grid", "n_bar", "points"]);
        assert!(split_args(&args("tavis qfi --n-atoms")).is_err());
    }
}
