//! Monte Carlo, refinement studies, configuration files and the CLI runners.

pub mod commands;
pub mod converge;
pub mod mc;
pub mod output;
pub mod run_config;

pub use commands::{run_command, Command};
pub use converge::{convergence_study, convergence_study_with, ConvergenceReport};
pub use mc::{run_mc, run_mc_with, McOptions, MomentReport};
pub use run_config::{load_config, load_config_for, read_config, InitialData, ModelKind, Oracle, RunConfig};

use crate::config::GridSpec;
use crate::error::{FspdeError, Result};
use crate::linear::evolve_linear;
use crate::mild::{MildOperator, PathState, PicardDiagnostics};
use crate::noise::SheetIncrements;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "FSPDE_THREADS";

/// `FSPDE_THREADS` if set to a positive integer.
pub fn thread_limit() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(FspdeError::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        },
    }
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| FspdeError::Config(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Solves the configured model on `grid` driven by `sheet`. Picard runs
/// also return their diagnostics.
pub fn solve_on(cfg: &RunConfig, grid: &GridSpec, sheet: &SheetIncrements) -> Result<(PathState, Option<PicardDiagnostics>)> {
    match cfg.model {
        ModelKind::Linear => {
            let mut model = cfg.linear_model()?;
            model.u0 = cfg.u0.sample(grid);
            Ok((evolve_linear(&model, grid, sheet)?.into(), None))
        }
        ModelKind::Nonlinear => {
            let op = MildOperator::new(&cfg.params, &cfg.coefficients(), grid)?;
            let (path, diag) = op.picard_solve(&cfg.u0.sample(grid), sheet, &cfg.picard_options())?;
            Ok((path, Some(diag)))
        }
    }
}
