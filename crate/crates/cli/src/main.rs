//! `qpf`: batch evaluation of torus partition functions and their oracles.

mod commands;
mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;
use crate::report::Report;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] qpf_core::Error),
    #[error("cannot access `{path}`: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(qpf_core::Error::Internal(_)) => 3,
            _ => 2,
        }
    }
}

/// Result of a command that ran to completion.
pub struct Outcome {
    pub report: Report,
    /// False when a tolerance or validity check failed.
    pub passed: bool,
}

#[derive(Debug, Parser)]
#[command(name = "qpf", version, about = "Partition functions of interacting quantum gases on a torus")]
struct Cli {
    /// Run configuration (flat `key = value` file).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the JSON report here, and any table next to it as CSV.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tolerance for the comparison the command performs.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads for the series evaluation.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate Q, log Q and the free energy for the configured system.
    Evaluate,
    /// Run an independent oracle against its series counterpart.
    Oracle {
        which: OracleKind,
        /// Matrix size for `matrix-a` (default: every size 2..=50).
        #[arg(long)]
        m: Option<usize>,
    },
    /// Check whether an edge list describes a valid merger graph.
    GraphValidate { file: PathBuf },
    /// Check that both cycle-weight families sum to one.
    UnityCheck { n: usize },
    /// Print theta(c, 0) in d dimensions.
    Theta { c: f64, d: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleKind {
    IdealGas,
    Discrete2,
    Exactdiag,
    MatrixA,
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    let path = path.ok_or_else(|| CliError::Usage("this command needs --config <path>".into()))?;
    RunConfig::load(path)
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if let Some(tol) = cli.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Usage(format!("--tol must be positive, got {tol}")));
        }
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    }
    let config = cli.config.as_deref();
    match &cli.command {
        Command::Evaluate => commands::evaluate(&load_config(config)?, cli.tol),
        Command::Oracle {
            which: OracleKind::MatrixA,
            m,
        } => {
            let from_config = match config {
                Some(p) => RunConfig::load(p)?.matrix_m,
                None => None,
            };
            commands::matrix_a(m.or(from_config))
        }
        Command::Oracle { which, .. } => commands::oracle(*which, &load_config(config)?, cli.tol),
        Command::GraphValidate { file } => commands::graph_validate(file),
        Command::UnityCheck { n } => commands::unity_check(*n),
        Command::Theta { c, d } => commands::theta(*c, *d, cli.tol),
    }
}

fn write_outputs(report: &Report, out: &Path) -> Result<(), CliError> {
    std::fs::write(out, report.to_json()).map_err(|e| CliError::io(out, e))?;
    if let Some(csv) = report.to_csv() {
        let path = out.with_extension("csv");
        std::fs::write(&path, csv).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|o| {
        if let Some(out) = &cli.out {
            write_outputs(&o.report, out)?;
        }
        Ok(o)
    });
    match outcome {
        Ok(o) => {
            print!("{}", o.report.to_text());
            ExitCode::from(if o.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("qpf: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
