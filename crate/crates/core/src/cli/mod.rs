//! Command-line front end. Configuration is TOML; outputs are plot-ready CSV
//! or a JSON bundle. Exit codes: 0 success, 2 input or configuration error,
//! 3 numerical failure.

mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use commands::{read_series, FitKind};
use config::RunConfig;
use output::{Output, Provenance};

use crate::Error;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "trapdeco", version, about = "Motional decoherence and heating in trapped-ion chains")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; side tables are written next to it. Standard output if
    /// omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Record the wall-clock time in the JSON provenance. Off by default so
    /// that reruns are byte-identical.
    #[arg(long, global = true)]
    pub stamp: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Equilibrium chain and axial normal modes.
    Modes,
    /// Thermally averaged Rabi trace.
    Rabi {
        /// Monte-Carlo thermal average instead of the closed form.
        #[arg(long, conflicts_with = "closed")]
        mc: bool,
        /// Closed form (the default).
        #[arg(long)]
        closed: bool,
    },
    /// Decay parameter against beam-to-ion offset.
    ThetaScan,
    /// Fit measured data; `data` is a CSV with a header and columns
    /// `x,y[,sigma]`.
    Fit {
        #[arg(value_enum)]
        kind: FitKind,
        data: PathBuf,
        /// Shots per point; derives binomial σ for population data.
        #[arg(long)]
        shots: Option<u64>,
        /// Modes with independent decay parameters in a Rabi fit.
        #[arg(long, default_value_t = 1)]
        n_modes: usize,
    },
    /// Gate fidelity after a wait time, with SPAM adjustment.
    GateFidelity {
        /// Wait times in ms, comma separated.
        #[arg(long, value_delimiter = ',')]
        tw_list: Option<Vec<f64>>,
    },
    /// Lowest mode and relative gate error against chain length.
    Scaling {
        /// Chain lengths, comma separated.
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        /// Assume ω₀ ∝ 1/N for the error column.
        #[arg(long)]
        inverse_n: bool,
    },
    /// Crosstalk rate from sympathetic cooling.
    Cooling,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_INPUT };
        Failure { code, message: e.to_string() }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure { code: EXIT_INPUT, message: "this command needs --config".into() })?;
    Ok(RunConfig::load(path)?)
}

fn execute(cli: &Cli) -> Result<Output, Failure> {
    Ok(match &cli.command {
        Command::Fit { kind, data, shots, n_modes } => commands::fit(*kind, data, *shots, *n_modes, cli.seed)?,
        Command::Modes => commands::modes(&load_config(cli)?)?,
        Command::Rabi { mc, .. } => commands::rabi(&load_config(cli)?, *mc, cli.seed)?,
        Command::ThetaScan => commands::theta_scan(&load_config(cli)?)?,
        Command::GateFidelity { tw_list } => commands::gate_fidelity(&load_config(cli)?, tw_list.clone())?,
        Command::Scaling { n_list, inverse_n } => commands::scaling(&load_config(cli)?, n_list.clone(), *inverse_n)?,
        Command::Cooling => commands::cooling(&load_config(cli)?)?,
    })
}

fn write_outputs(cli: &Cli, out: &Output) -> Result<(), Failure> {
    let provenance = Provenance {
        seed: cli.seed,
        timestamp: cli
            .stamp
            .then(|| std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs())),
    };
    for (path, contents) in out.render(cli.out.as_deref(), cli.format == Format::Json, &provenance) {
        match path {
            Some(p) => std::fs::write(&p, contents)
                .map_err(|e| Failure { code: EXIT_INPUT, message: format!("cannot write {}: {e}", p.display()) })?,
            None => {
                let mut stdout = std::io::stdout().lock();
                let _ = stdout.write_all(contents.as_bytes());
            }
        }
    }
    Ok(())
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { 0 };
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("TRAPDECO_LOG", "warn")).try_init();
    match execute(&cli).and_then(|out| write_outputs(&cli, &out)) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
