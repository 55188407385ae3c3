use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ppwpi_cli::config;
use ppwpi_cli::run::{self, RunError, EXIT_OK, EXIT_SELFTEST, EXIT_USAGE};
use ppwpi_core::model::DEFAULT_N_MAX;
use ppwpi_core::selftest::run_selftest;

/// Pump-probe anisotropy of a vibronic energy-transfer dimer.
#[derive(Parser)]
#[command(name = "dimer-ppwpi", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the calculation described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path; overrides `run.output`. Without either, CSV goes
        /// to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for delay scans and sweeps.
        #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
        threads: Option<u16>,
    },
    /// Run the invariant suite.
    Selftest {
        #[arg(long, default_value_t = DEFAULT_N_MAX)]
        n_max: usize,
    },
}

fn run(config_path: PathBuf, out: Option<PathBuf>, threads: Option<u16>) -> Result<(), RunError> {
    if let Some(n) = threads {
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n as usize).build_global();
    }
    let config = config::load(&config_path)?;
    log::info!("{}", run::describe(&config));
    let Some(text) = run::execute(&config)? else {
        return Ok(());
    };
    match out.or(config.output.clone()) {
        Some(path) => run::write_atomically(&path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Run { config, out, threads } => match run(config, out, threads) {
            Ok(()) => ExitCode::from(EXIT_OK),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code())
            }
        },
        Command::Selftest { n_max } => {
            if n_max == 0 {
                eprintln!("error: --n-max must be at least 1");
                return ExitCode::from(EXIT_USAGE);
            }
            let report = run_selftest(n_max);
            run::print_report(&report);
            ExitCode::from(if report.passed() { EXIT_OK } else { EXIT_SELFTEST })
        }
    }
}
