//! `locapart`: run partitioned-Hamiltonian scenarios from a TOML config,
//! list the built-in presets, and write plot scripts for the CSV outputs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};

mod error;
mod output;
mod plot;
mod run;

use error::CliError;

const THREADS_VAR: &str = "LOCAPART_THREADS";

#[derive(Parser)]
#[command(name = "locapart", version, about = "Subsystem energy-transfer dynamics on small hydrogenic systems")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write CSV outputs plus a manifest.
    Run {
        config: PathBuf,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a gnuplot script for one or more CSV outputs.
    Plot {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        /// Script path (default: plot.gp next to the first CSV).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// List the built-in scenario presets.
    Presets {
        /// Print one preset as a config file.
        #[arg(long)]
        show: Option<String>,
        /// Write every preset as `<name>.toml` into this directory.
        #[arg(long)]
        write: Option<PathBuf>,
    },
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{THREADS_VAR} must be a positive integer; got `{v}`")))?;
    if n == 0 {
        return Err(CliError::Config(format!("{THREADS_VAR} must be a positive integer; got `{v}`")));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot set up {n} threads: {e}")))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    match cli.command {
        Command::Run { config, out } => {
            let dir = run::run(&config, out.as_deref())?;
            println!("wrote {}", dir.display());
        }
        Command::Plot { csv, output } => {
            let path = plot::emit(&csv, output.as_deref())?;
            println!("wrote {}", path.display());
        }
        Command::Presets { show, write } => run::presets(show.as_deref(), write.as_deref())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("locapart: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
