//! Mild solutions by Picard iteration of the variation-of-constants map
//!
//! ```text
//! (A u)(t) = G(t)∗u0 + Σ_k ∫_0^t ∂^k G(t−s)∗h_k(s, ·, u(s)) ds
//!          + ∫_0^t ∫ G(t−s, ·−y) f(s, y, u(s, y)) W(dy ds)
//! ```
//!
//! on a full space-time path with the noise frozen. Everything happens per
//! Fourier mode. Coefficients are evaluated at the left end of each cell;
//! the deterministic time kernel is integrated exactly over the cell, so
//! the `(t−s)^{−k/α}` singularity of `∂^k G` never meets a quadrature node.
//! Noise cells carry the semigroup weight of the cell's right end times the
//! exact-variance gain of [`crate::etd::noise_gain`].

use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::{Coefficient, CoefficientSpec, FracParams, GridSpec};
use crate::error::{domain, FspdeError, Result};
use crate::etd::{noise_gain, phi1};
use crate::frac::{Field, Spectral, SpectralField};
use crate::linear::{LinearModel, Trajectory};
use crate::noise::{weighted_increment, SheetIncrements};

/// One candidate path `u(t_0), …, u(t_M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathState {
    pub grid: GridSpec,
    pub levels: Vec<Field>,
}

impl PathState {
    pub fn level(&self, n: usize) -> &Field {
        &self.levels[n]
    }

    pub fn final_state(&self) -> &Field {
        self.levels.last().expect("path has levels")
    }

    /// `max_n |self(t_n) − other(t_n)|₂`
    pub fn max_l2_distance(&self, other: &PathState) -> f64 {
        let dx = self.grid.dx();
        self.levels
            .iter()
            .zip(&other.levels)
            .map(|(a, b)| a.sub(b).l2_norm(dx))
            .fold(0.0, f64::max)
    }

    /// `max_n |self − other|₂ / max_n |other|₂`
    pub fn rel_l2_distance(&self, other: &PathState) -> f64 {
        let dx = self.grid.dx();
        let den = other.levels.iter().map(|v| v.l2_norm(dx)).fold(0.0, f64::max);
        let num = self.max_l2_distance(other);
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }

    /// `|u(t_n)|₂²` for every level.
    pub fn energy(&self) -> Vec<f64> {
        let dx = self.grid.dx();
        self.levels.iter().map(|v| v.l2_norm(dx).powi(2)).collect()
    }
}

impl From<Trajectory> for PathState {
    fn from(t: Trajectory) -> Self {
        Self {
            grid: t.grid,
            levels: t.states,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardDiagnostics {
    /// `d_p = max_n |u^{(p+1)}(t_n) − u^{(p)}(t_n)|₂`
    pub distances: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl PicardDiagnostics {
    /// `d_{p+1}/d_p` for each consecutive pair.
    pub fn ratios(&self) -> Vec<f64> {
        self.distances.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

#[derive(Debug, Clone, Default)]
pub enum InitialGuess {
    /// `u^{(0)}(t) = G(t)∗u0`
    #[default]
    FreeEvolution,
    /// `u^{(0)} ≡ 0` after the first level.
    Zero,
    Path(PathState),
}

#[derive(Debug, Clone)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub initial: InitialGuess,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 50,
            initial: InitialGuess::FreeEvolution,
        }
    }
}

impl PicardOptions {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        Self {
            tol,
            max_iter,
            ..Self::default()
        }
    }

    pub fn with_initial(mut self, initial: InitialGuess) -> Self {
        self.initial = initial;
        self
    }
}

/// Coefficients of the linear model as a mild problem: `f` unchanged and
/// `h_k = c_k·u`.
pub fn linear_coefficients(model: &LinearModel) -> CoefficientSpec {
    let h = model.params.drift.iter().map(|&c| Coefficient::Linear(c)).collect();
    let lip = model.params.drift.iter().fold(0.0_f64, |a, c| a.max(c.abs()));
    CoefficientSpec::new(model.f.clone(), h, lip)
}

/// The operator `A` on a fixed grid with all per-mode weights tabulated.
#[derive(Debug)]
pub struct MildOperator {
    spec: Spectral,
    params: FracParams,
    coeffs: CoefficientSpec,
    psi: Vec<Complex64>,
    /// `e^{ψ dt}`
    decay: Vec<Complex64>,
    /// `∫_0^{dt} e^{ψ s} ds`
    cell: Vec<Complex64>,
    gain: Vec<f64>,
    /// `(−iλ)^k` for `k = 0..=m`
    deriv: Vec<Vec<Complex64>>,
}

impl MildOperator {
    pub fn new(params: &FracParams, coeffs: &CoefficientSpec, grid: &GridSpec) -> Result<Self> {
        params.check_operator()?;
        grid.check()?;
        if coeffs.h.len() > params.m + 1 {
            return domain(format!(
                "{} drift coefficients given but m = {}",
                coeffs.h.len(),
                params.m
            ));
        }
        let spec = Spectral::new(grid)?;
        let psi = spec.symbol_multiplier(params.alpha, params.delta);
        let dt = grid.dt();
        let decay = psi.iter().map(|p| (p * dt).exp()).collect();
        let cell = psi.iter().map(|p| dt * phi1(p * dt)).collect();
        let gain = psi.iter().map(|p| noise_gain(p.re, dt)).collect();
        let deriv = (0..=params.m).map(|k| spec.derivative_multiplier(k)).collect();
        Ok(Self {
            spec,
            params: params.clone(),
            coeffs: coeffs.clone(),
            psi,
            decay,
            cell,
            gain,
            deriv,
        })
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spec
    }

    pub fn grid(&self) -> &GridSpec {
        self.spec.grid()
    }

    pub fn params(&self) -> &FracParams {
        &self.params
    }

    pub fn coeffs(&self) -> &CoefficientSpec {
        &self.coeffs
    }

    fn check_path(&self, path: &PathState) -> Result<()> {
        let g = self.grid();
        if &path.grid != g || path.levels.len() != g.n_steps + 1 {
            return domain("path does not match the operator grid");
        }
        Ok(())
    }

    fn check_sheet(&self, sheet: &SheetIncrements) -> Result<()> {
        if &sheet.grid != self.grid() {
            return domain("noise sheet lives on a different grid");
        }
        Ok(())
    }

    fn sample(&self, c: &Coefficient, t: f64, u: &[f64]) -> Vec<f64> {
        let g = self.grid();
        u.iter().enumerate().map(|(i, &v)| c.eval(t, g.x(i), v)).collect()
    }

    /// `Σ_k (−iλ)^k F h_k(t_l, ·, u_l)` without the time weight.
    fn drift_hat(&self, l: usize, u: &[f64]) -> Result<Option<Vec<Complex64>>> {
        let t = self.grid().time(l);
        let mut acc: Option<Vec<Complex64>> = None;
        for k in 0..=self.params.m {
            let h = self.coeffs.h(k);
            if h.is_zero() {
                continue;
            }
            let hat = self.spec.forward(&self.sample(h, t, u))?;
            let a = acc.get_or_insert_with(|| vec![Complex64::new(0.0, 0.0); u.len()]);
            for ((a, m), v) in a.iter_mut().zip(&self.deriv[k]).zip(hat.iter()) {
                *a += m * v;
            }
        }
        Ok(acc)
    }

    /// `Σ_i e^{iλ y_i} f(t_l, y_i, u_l(y_i)) dW[l][i]`
    fn noise_hat(&self, l: usize, u: &[f64], sheet: &SheetIncrements) -> Result<Option<Vec<Complex64>>> {
        if self.coeffs.f.is_zero() {
            return Ok(None);
        }
        let fv = self.sample(&self.coeffs.f, self.grid().time(l), u);
        weighted_increment(&self.spec, sheet.row(l), &fv).map(Some)
    }

    /// `G(t)∗u0` as a spectral multiplication.
    pub fn apply_a0(&self, u0: &[f64], t: f64) -> Result<Field> {
        if t < 0.0 {
            return domain(format!("apply_a0 needs t >= 0, got {t}"));
        }
        if t == 0.0 {
            return Ok(Field(u0.to_vec()));
        }
        let hat = self.spec.forward(u0)?;
        let m: Vec<Complex64> = self.psi.iter().map(|p| (p * t).exp()).collect();
        self.spec.inverse(&hat.mul(&m))
    }

    /// Drift term `k` at `t_n`, summed directly over the cells `l < n`.
    pub fn apply_ak(&self, path: &PathState, k: usize, n: usize) -> Result<Field> {
        self.check_path(path)?;
        if k > self.params.m {
            return domain(format!("k = {k} exceeds m = {}", self.params.m));
        }
        let g = self.grid();
        let h = self.coeffs.h(k);
        let mut acc = SpectralField::zeros(g.n_points);
        if !h.is_zero() {
            for l in 0..n {
                let hat = self.spec.forward(&self.sample(h, g.time(l), path.level(l)))?;
                let lag = g.time(n) - g.time(l + 1);
                for j in 0..acc.len() {
                    acc[j] += (self.psi[j] * lag).exp() * self.cell[j] * self.deriv[k][j] * hat[j];
                }
            }
        }
        self.spec.inverse(&acc)
    }

    /// Stochastic convolution at `t_n`, summed directly over the cells `l < n`.
    pub fn apply_a_stoch(&self, path: &PathState, n: usize, sheet: &SheetIncrements) -> Result<Field> {
        self.check_path(path)?;
        self.check_sheet(sheet)?;
        let g = self.grid();
        let mut acc = SpectralField::zeros(g.n_points);
        for l in 0..n {
            if let Some(d) = self.noise_hat(l, path.level(l), sheet)? {
                let lag = g.time(n) - g.time(l + 1);
                for j in 0..acc.len() {
                    acc[j] += (self.psi[j] * lag).exp() * self.gain[j] * d[j];
                }
            }
        }
        self.spec.inverse(&acc)
    }

    /// `A u` on every level at once, via `S_{n+1} = e^{ψdt} S_n + F_n`
    /// where `F_n` is the cell-`n` forcing. Forcing terms of different
    /// cells are independent and are computed in parallel.
    pub fn sweep(&self, u0: &[f64], path: &PathState, sheet: &SheetIncrements) -> Result<PathState> {
        self.check_path(path)?;
        self.check_sheet(sheet)?;
        let g = *self.grid();
        let forcing: Vec<Option<Vec<Complex64>>> = (0..g.n_steps)
            .into_par_iter()
            .map(|l| self.cell_forcing(l, path.level(l), sheet, false))
            .collect::<Result<_>>()?;
        self.accumulate(u0, forcing.iter().map(|f| f.as_deref()))
    }

    fn cell_forcing(
        &self,
        l: usize,
        u: &[f64],
        sheet: &SheetIncrements,
        start_weight: bool,
    ) -> Result<Option<Vec<Complex64>>> {
        let drift = self.drift_hat(l, u)?;
        let noise = self.noise_hat(l, u, sheet)?;
        if drift.is_none() && noise.is_none() {
            return Ok(None);
        }
        let mut out = vec![Complex64::new(0.0, 0.0); u.len()];
        if let Some(d) = drift {
            for ((o, c), v) in out.iter_mut().zip(&self.cell).zip(&d) {
                *o += c * v;
            }
        }
        if let Some(d) = noise {
            for j in 0..out.len() {
                out[j] += if start_weight {
                    self.decay[j] * d[j]
                } else {
                    self.gain[j] * d[j]
                };
            }
        }
        Ok(Some(out))
    }

    fn accumulate<'a>(
        &self,
        u0: &[f64],
        forcing: impl Iterator<Item = Option<&'a [Complex64]>>,
    ) -> Result<PathState> {
        let g = *self.grid();
        let mut s = self.spec.forward(u0)?;
        let mut hats = Vec::with_capacity(g.n_steps + 1);
        hats.push(s.clone());
        for f in forcing {
            for j in 0..s.len() {
                s[j] *= self.decay[j];
            }
            if let Some(f) = f {
                s.iter_mut().zip(f).for_each(|(a, b)| *a += b);
            }
            hats.push(s.clone());
        }
        let mut levels: Vec<Field> = hats
            .par_iter()
            .map(|h| self.spec.inverse(h))
            .collect::<Result<_>>()?;
        levels[0] = Field(u0.to_vec());
        check_finite(&levels)?;
        Ok(PathState { grid: g, levels })
    }

    /// `G(t_n)∗u0` on every level.
    pub fn free_path(&self, u0: &[f64]) -> Result<PathState> {
        let g = *self.grid();
        self.accumulate(u0, (0..g.n_steps).map(|_| None))
    }

    pub fn picard_solve(
        &self,
        u0: &[f64],
        sheet: &SheetIncrements,
        opts: &PicardOptions,
    ) -> Result<(PathState, PicardDiagnostics)> {
        if !(opts.tol > 0.0) {
            return domain(format!("tol must be positive, got {}", opts.tol));
        }
        self.check_sheet(sheet)?;
        let g = *self.grid();
        let mut cur = match &opts.initial {
            InitialGuess::FreeEvolution => self.free_path(u0)?,
            InitialGuess::Zero => {
                let mut levels = vec![Field::zeros(g.n_points); g.n_steps + 1];
                levels[0] = Field(u0.to_vec());
                PathState { grid: g, levels }
            }
            InitialGuess::Path(p) => {
                self.check_path(p)?;
                let mut p = p.clone();
                p.levels[0] = Field(u0.to_vec());
                p
            }
        };
        let mut distances = Vec::new();
        let mut converged = false;
        while distances.len() < opts.max_iter {
            let next = self.sweep(u0, &cur, sheet)?;
            let d = next.max_l2_distance(&cur);
            distances.push(d);
            cur = next;
            if d < opts.tol {
                converged = true;
                break;
            }
        }
        let iterations = distances.len();
        Ok((
            cur,
            PicardDiagnostics {
                distances,
                iterations,
                converged,
            },
        ))
    }

    /// One pass `û_{n+1} = e^{ψdt}(û_n + ΔΞ_n) + (∫_0^{dt} e^{ψs} ds)·Σ_k (−iλ)^k ĥ_k`,
    /// with the noise weighted at the start of the cell.
    pub fn etd_march(&self, u0: &[f64], sheet: &SheetIncrements) -> Result<PathState> {
        self.check_sheet(sheet)?;
        let g = *self.grid();
        let mut s = self.spec.forward(u0)?;
        let mut levels = Vec::with_capacity(g.n_steps + 1);
        levels.push(Field(u0.to_vec()));
        for n in 0..g.n_steps {
            let f = self.cell_forcing(n, &levels[n], sheet, true)?;
            for j in 0..s.len() {
                s[j] *= self.decay[j];
            }
            if let Some(f) = f {
                s.iter_mut().zip(&f).for_each(|(a, b)| *a += b);
            }
            let u = self.spec.inverse(&s)?;
            if let Some(i) = u.iter().position(|v| !v.is_finite()) {
                return Err(FspdeError::Instability {
                    level: n + 1,
                    detail: format!("non-finite value at node {i}"),
                });
            }
            levels.push(u);
        }
        Ok(PathState { grid: g, levels })
    }

    /// `max_n |u(t_n) − (A u)(t_n)|₂`
    pub fn fixed_point_residual(&self, u0: &[f64], path: &PathState, sheet: &SheetIncrements) -> Result<f64> {
        Ok(self.sweep(u0, path, sheet)?.max_l2_distance(path))
    }
}

const BLOWUP: f64 = 1e150;

fn check_finite(levels: &[Field]) -> Result<()> {
    for (n, u) in levels.iter().enumerate() {
        if let Some(i) = u.iter().position(|v| !v.is_finite() || v.abs() > BLOWUP) {
            return Err(FspdeError::Instability {
                level: n,
                detail: format!("value {} at node {i}", u[i]),
            });
        }
    }
    Ok(())
}

pub fn apply_a0(u0: &[f64], t: f64, params: &FracParams, grid: &GridSpec) -> Result<Field> {
    MildOperator::new(params, &CoefficientSpec::zero(), grid)?.apply_a0(u0, t)
}

pub fn apply_ak(
    path: &PathState,
    k: usize,
    n: usize,
    coeffs: &CoefficientSpec,
    params: &FracParams,
) -> Result<Field> {
    MildOperator::new(params, coeffs, &path.grid)?.apply_ak(path, k, n)
}

pub fn apply_a_stoch(
    path: &PathState,
    n: usize,
    coeffs: &CoefficientSpec,
    params: &FracParams,
    sheet: &SheetIncrements,
) -> Result<Field> {
    MildOperator::new(params, coeffs, &path.grid)?.apply_a_stoch(path, n, sheet)
}

pub fn picard_solve(
    u0: &[f64],
    coeffs: &CoefficientSpec,
    params: &FracParams,
    grid: &GridSpec,
    sheet: &SheetIncrements,
    opts: &PicardOptions,
) -> Result<(PathState, PicardDiagnostics)> {
    MildOperator::new(params, coeffs, grid)?.picard_solve(u0, sheet, opts)
}

pub fn etd_march(
    u0: &[f64],
    coeffs: &CoefficientSpec,
    params: &FracParams,
    grid: &GridSpec,
    sheet: &SheetIncrements,
) -> Result<PathState> {
    MildOperator::new(params, coeffs, grid)?.etd_march(u0, sheet)
}
