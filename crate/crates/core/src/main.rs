use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use fspde::harness::{read_config, run_command, thread_limit, Command};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sub {
    Kernel,
    SimulateLinear,
    SimulateMild,
    Verify,
    Mc,
    Converge,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Kernel => Command::Kernel,
            Sub::SimulateLinear => Command::SimulateLinear,
            Sub::SimulateMild => Command::SimulateMild,
            Sub::Verify => Command::Verify,
            Sub::Mc => Command::Mc,
            Sub::Converge => Command::Converge,
        }
    }
}

/// Stochastic fractional PDE laboratory. Set FSPDE_THREADS to cap the
/// number of worker threads.
#[derive(Debug, Parser)]
#[command(name = "fspde", version)]
struct Cli {
    #[arg(value_enum)]
    command: Sub,
    /// Run configuration (key = value lines).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn run(cli: Cli) -> fspde::Result<()> {
    if let Some(n) = thread_limit()? {
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut cfg = read_config(&cli.config)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    for f in run_command(cli.command.into(), &cfg, &cli.out)? {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fspde: {e}");
            ExitCode::FAILURE
        }
    }
}
