//! Monte Carlo estimates of `E|u(t)|₂^p` for `p ∈ {2, 4}`.
//!
//! Path `i` is driven by noise stream `i` of the base seed. Paths run in
//! parallel; the reduction walks them in index order, so estimates do not
//! depend on the number of workers.

use rayon::prelude::*;

use crate::config::GridSpec;
use crate::error::{domain, Result};
use crate::linear::evolve_linear_with;
use crate::frac::Spectral;
use crate::mild::MildOperator;
use crate::noise::sample_sheet;

use super::run_config::{ModelKind, RunConfig};
use super::{thread_limit, with_threads};

pub const MIN_PATHS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub times: Vec<f64>,
    /// `Ê|u(t)|₂²`
    pub m2: Vec<f64>,
    pub m2_se: Vec<f64>,
    /// `Ê|u(t)|₂⁴`
    pub m4: Vec<f64>,
    pub m4_se: Vec<f64>,
    /// Paths entering the estimates.
    pub n_paths: usize,
    /// Paths dropped because Picard did not converge.
    pub excluded: usize,
    pub sup_m2: f64,
    pub sup_m4: f64,
}

#[derive(Debug, Clone, Default)]
pub struct McOptions {
    /// Sample noise on this finer grid and aggregate it down, so that runs
    /// at different resolutions see the same realizations.
    pub noise_grid: Option<GridSpec>,
    /// Worker count; `None` reads `FSPDE_THREADS`.
    pub threads: Option<usize>,
}

pub fn run_mc(cfg: &RunConfig, n_paths: usize, base_seed: u64) -> Result<MomentReport> {
    run_mc_with(cfg, n_paths, base_seed, &McOptions::default())
}

pub fn run_mc_with(cfg: &RunConfig, n_paths: usize, base_seed: u64, opts: &McOptions) -> Result<MomentReport> {
    if n_paths < MIN_PATHS {
        return domain(format!("run_mc needs at least {MIN_PATHS} paths, got {n_paths}"));
    }
    let threads = match opts.threads {
        Some(n) => Some(n),
        None => thread_limit()?,
    };
    let grid = cfg.grid;
    let noise_grid = opts.noise_grid.unwrap_or(grid);
    let u0 = cfg.initial_field();

    enum Solver {
        Linear(Box<crate::linear::LinearModel>, Spectral),
        Mild(MildOperator),
    }
    let solver = match cfg.model {
        ModelKind::Linear => Solver::Linear(Box::new(cfg.linear_model()?), Spectral::new(&grid)?),
        ModelKind::Nonlinear => Solver::Mild(MildOperator::new(&cfg.params, &cfg.coefficients(), &grid)?),
    };
    let picard = cfg.picard_options();

    let energies: Vec<Option<Vec<f64>>> = with_threads(threads, || {
        (0..n_paths as u64)
            .into_par_iter()
            .map(|stream| -> Result<Option<Vec<f64>>> {
                let sheet = sample_sheet(&noise_grid, base_seed, stream)?;
                let sheet = if noise_grid == grid { sheet } else { sheet.aggregate_to(&grid)? };
                let dx = grid.dx();
                match &solver {
                    Solver::Linear(model, spec) => {
                        let traj = evolve_linear_with(spec, model, &sheet)?;
                        Ok(Some(traj.states.iter().map(|s| s.l2_norm(dx).powi(2)).collect()))
                    }
                    Solver::Mild(op) => {
                        let (path, diag) = op.picard_solve(&u0, &sheet, &picard)?;
                        Ok(diag.converged.then(|| path.energy()))
                    }
                }
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let kept: Vec<&Vec<f64>> = energies.iter().flatten().collect();
    let excluded = n_paths - kept.len();
    let levels = grid.n_steps + 1;
    let n = kept.len();
    let mut m2 = vec![f64::NAN; levels];
    let mut m2_se = vec![f64::NAN; levels];
    let mut m4 = vec![f64::NAN; levels];
    let mut m4_se = vec![f64::NAN; levels];
    if n > 0 {
        for l in 0..levels {
            let (a, b) = mean_se(kept.iter().map(|e| e[l]));
            m2[l] = a;
            m2_se[l] = b;
            let (a, b) = mean_se(kept.iter().map(|e| e[l] * e[l]));
            m4[l] = a;
            m4_se[l] = b;
        }
    }
    let sup = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(MomentReport {
        times: grid.times(),
        sup_m2: sup(&m2),
        sup_m4: sup(&m4),
        m2,
        m2_se,
        m4,
        m4_se,
        n_paths: n,
        excluded,
    })
}

/// Sample mean and `std/√n`, summed in iteration order.
pub fn mean_se(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, f64::NAN);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Coefficient, FracParams};
    use crate::etd::ou_mode_variance;
    use crate::harness::run_config::InitialData;

    fn linear_cfg() -> RunConfig {
        let mut c = RunConfig::new(FracParams::new(1.5, 0.3, 0), GridSpec::new(4.0, 32, 1.0, 8));
        c.model = ModelKind::Linear;
        c.f = Coefficient::Const(1.0);
        c.u0 = InitialData::Zero;
        c
    }

    #[test]
    fn linear_energy_matches_isometry() {
        let c = linear_cfg();
        let r = run_mc(&c, 2000, 17).unwrap();
        let spec = Spectral::new(&c.grid).unwrap();
        let psi = spec.symbol_multiplier(1.5, 0.3);
        let want: f64 = psi.iter().map(|p| ou_mode_variance(p.re, 1.0, 4.0)).sum::<f64>() / 8.0;
        let got = r.m2[8];
        assert!((got - want).abs() < 3.0 * r.m2_se[8], "{got} vs {want} ± {}", r.m2_se[8]);
        assert_eq!(r.excluded, 0);
    }

    #[test]
    fn deterministic_run_has_no_spread() {
        let mut c = linear_cfg();
        c.f = Coefficient::Zero;
        c.u0 = InitialData::Gaussian { width: 1.0 };
        let r = run_mc(&c, 100, 1).unwrap();
        assert!(r.m2_se.iter().zip(&r.m2).all(|(s, m)| *s <= 1e-14 * m));
        assert!(r.m2[0] > r.m2[8]);
    }

    #[test]
    fn worker_count_does_not_matter() {
        let mut c = RunConfig::new(FracParams::new(1.8, 0.1, 1), GridSpec::new(8.0, 16, 0.25, 16));
        c.f = Coefficient::Sin;
        c.h = vec![Coefficient::Zero, Coefficient::Linear(0.1)];
        let one = run_mc_with(&c, 100, 5, &McOptions { threads: Some(1), ..Default::default() }).unwrap();
        let four = run_mc_with(&c, 100, 5, &McOptions { threads: Some(4), ..Default::default() }).unwrap();
        assert_eq!(one, four);
        assert!(run_mc(&c, 10, 5).is_err());
    }

    #[test]
    fn failed_paths_are_excluded() {
        let mut c = RunConfig::new(FracParams::new(1.8, 0.1, 1), GridSpec::new(8.0, 16, 0.25, 16));
        c.f = Coefficient::Sin;
        c.h = vec![Coefficient::Zero, Coefficient::Linear(0.1)];
        c.max_iter = 1;
        c.tol = 1e-15;
        let r = run_mc(&c, 100, 5).unwrap();
        assert_eq!(r.excluded, 100);
        assert_eq!(r.n_paths, 0);
    }
}
