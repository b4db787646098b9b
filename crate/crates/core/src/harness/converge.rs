//! Pathwise self-convergence under grid refinement. One noise path is
//! sampled on the finest grid and aggregated down to every coarser level.

use crate::error::{domain, Result};
use crate::config::GridSpec;
use crate::frac::Field;
use crate::mild::PathState;
use crate::noise::sample_sheet;

use super::run_config::RunConfig;
use super::solve_on;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// `(N, M)` per level, coarse to fine.
    pub levels: Vec<(usize, usize)>,
    /// `max_n |u_ℓ(t_n) − u_{ℓ+1}(t_n)|₂` on the coarse grid of each pair.
    pub differences: Vec<f64>,
    /// `log₂(d_ℓ / d_{ℓ+1})`
    pub orders: Vec<f64>,
}

pub fn convergence_study(cfg: &RunConfig, levels: usize) -> Result<ConvergenceReport> {
    convergence_study_with(cfg, levels, 2, 2)
}

/// Level `ℓ` has `N·space^ℓ` nodes and `M·time^ℓ` steps.
pub fn convergence_study_with(
    cfg: &RunConfig,
    levels: usize,
    space_factor: usize,
    time_factor: usize,
) -> Result<ConvergenceReport> {
    if levels < 3 {
        return domain(format!("convergence study needs at least 3 levels, got {levels}"));
    }
    if space_factor == 0 || time_factor == 0 || space_factor * time_factor == 1 {
        return domain("refinement factors must be positive and not both 1");
    }
    let grids: Vec<GridSpec> = (0..levels as u32)
        .map(|l| cfg.grid.refine(space_factor.pow(l), time_factor.pow(l)))
        .collect();
    let finest = *grids.last().expect("levels >= 3");
    let sheet = sample_sheet(&finest, cfg.seed, 0)?;
    let paths = grids
        .iter()
        .map(|g| {
            let s = sheet.aggregate_to(g)?;
            Ok(solve_on(cfg, g, &s)?.0)
        })
        .collect::<Result<Vec<_>>>()?;
    let differences: Vec<f64> = paths
        .windows(2)
        .map(|w| restricted_distance(&w[0], &w[1], space_factor, time_factor))
        .collect();
    let orders = differences.windows(2).map(|d| (d[0] / d[1]).log2()).collect();
    Ok(ConvergenceReport {
        levels: grids.iter().map(|g| (g.n_points, g.n_steps)).collect(),
        differences,
        orders,
    })
}

/// Distance between a coarse path and a fine path sampled at the coarse
/// nodes and times.
pub fn restricted_distance(coarse: &PathState, fine: &PathState, space_factor: usize, time_factor: usize) -> f64 {
    let dx = coarse.grid.dx();
    coarse
        .levels
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let f = &fine.levels[n * time_factor];
            let r = Field(f.iter().step_by(space_factor).copied().collect());
            c.sub(&r).l2_norm(dx)
        })
        .fold(0.0, f64::max)
}
