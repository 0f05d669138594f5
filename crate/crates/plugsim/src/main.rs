use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use plugsim::{commands, exit, SEED_ENV};

/// Calibrate, simulate and analyze impedance-controlled charger plug-in and
/// plug-out.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive controller parameters from a directory of demonstration CSVs.
    Calibrate {
        #[arg(long)]
        demos: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Socket depth used for the linear gain, mm.
        #[arg(long, default_value_t = 34.8)]
        depth: f64,
    },
    /// Run one mission and write its trace.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        plot: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a seeded sweep of missions in parallel and write a JSON report.
    Batch {
        #[arg(long)]
        sweep: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print mission metrics for a mission or demonstration trace.
    Analyze {
        #[arg(long)]
        trace: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                exit::INVALID
            } else {
                exit::SUCCESS
            });
        }
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    let env_seed = env_seed.as_deref();
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr();
    let code = match &cli.command {
        Command::Calibrate {
            demos,
            out: path,
            depth,
        } => commands::calibrate(demos, path, *depth, &mut out, &mut err),
        Command::Simulate {
            config,
            out: path,
            plot,
            seed,
        } => commands::simulate(config, path, plot.as_deref(), *seed, env_seed, &mut out),
        Command::Batch {
            sweep,
            out: path,
            jobs,
        } => commands::batch(sweep, path, *jobs, env_seed, &mut out),
        Command::Analyze { trace } => commands::analyze(trace, &mut out),
    };
    let _ = out.flush();
    match code {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            ExitCode::from(exit::INVALID)
        }
    }
}
