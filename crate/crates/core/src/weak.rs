//! Residuals of the weak formulations against a solved path.
//!
//! First kind, with a time-independent test function `φ`:
//!
//! ```text
//! ⟨u(t),φ⟩ − ⟨u0,φ⟩ − ∫⟨u, D^α_{−δ}φ⟩ − Σ_k (−1)^k ∫⟨h_k(u), φ^{(k)}⟩ − ∫∫ f(u) φ dW
//! ```
//!
//! Second kind replaces `φ` by `ψ(s, ·)` and adds `∫⟨u, ∂_s ψ⟩`. All time
//! integrals are left-endpoint sums over the grid cells.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::{CoefficientSpec, FracParams, GridSpec};
use crate::error::{domain, Result};
use crate::frac::{Field, Spectral};
use crate::mild::PathState;
use crate::noise::SheetIncrements;

/// Values of a bump below this count as outside the support.
const SUPPORT_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct TestFunction {
    pub grid: GridSpec,
    pub center: f64,
    pub width: f64,
    pub phi: Field,
    /// `φ^{(k)}` for `k = 0..=m`
    pub derivs: Vec<Field>,
    /// `D^α_{−δ} φ`
    pub frac_dual: Field,
}

/// A test function sampled on the levels `s = t_0, …, t_n` of a grid.
#[derive(Debug, Clone)]
pub struct TimeTestFunction {
    pub grid: GridSpec,
    /// Index `n` of the final time `t = t_n`.
    pub t_index: usize,
    pub psi: Vec<Field>,
    pub ds_psi: Vec<Field>,
    pub frac_dual: Vec<Field>,
    /// `∂^k_x ψ(t_l)` indexed `[l][k]`
    pub derivs: Vec<Vec<Field>>,
}

impl TimeTestFunction {
    /// `ψ(s, ·) = φ` for every `s ≤ t_n`.
    pub fn constant(phi: &TestFunction, t_index: usize) -> Self {
        let levels = t_index + 1;
        Self {
            grid: phi.grid,
            t_index,
            psi: vec![phi.phi.clone(); levels],
            ds_psi: vec![Field::zeros(phi.grid.n_points); levels],
            frac_dual: vec![phi.frac_dual.clone(); levels],
            derivs: vec![phi.derivs.clone(); levels],
        }
    }

    /// `max_l |(ψ(t_{l+1}) − ψ(t_l))/dt − ∂_sψ(t_l)|₂`, relative to
    /// `max_l |∂_sψ(t_l)|₂`.
    pub fn ds_consistency(&self) -> f64 {
        let dx = self.grid.dx();
        let dt = self.grid.dt();
        let mut num: f64 = 0.0;
        let mut den: f64 = 0.0;
        for l in 0..self.t_index {
            let fd = self.psi[l + 1].sub(&self.psi[l]).scale(1.0 / dt);
            num = num.max(fd.sub(&self.ds_psi[l]).l2_norm(dx));
            den = den.max(self.ds_psi[l].l2_norm(dx));
        }
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }
}

/// `exp(−1/(1−r²))` with `r = (x − center)/width`, zero for `|r| ≥ 1`.
pub fn bump_value(x: f64, center: f64, width: f64) -> f64 {
    let r = (x - center) / width;
    if r.abs() < 1.0 {
        (-1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

pub fn make_bump(center: f64, width: f64, grid: &GridSpec, params: &FracParams) -> Result<TestFunction> {
    let l = grid.half_width;
    if !(width > 0.0) || center - width <= -l || center + width >= l {
        return domain(format!(
            "bump support [{}, {}] is not inside (-{l}, {l})",
            center - width,
            center + width
        ));
    }
    let spec = Spectral::new(grid)?;
    let phi = Field::from_fn(grid, |x| bump_value(x, center, width));
    if phi[0].abs() >= SUPPORT_TOL {
        return domain("bump does not vanish at the torus edge");
    }
    let derivs = (0..=params.m)
        .map(|k| spec.derivative(&phi, k))
        .collect::<Result<Vec<_>>>()?;
    let dual = params.dual();
    let frac_dual = spec.apply_multiplier(&phi, &spec.symbol_multiplier(dual.alpha, dual.delta))?;
    Ok(TestFunction {
        grid: *grid,
        center,
        width,
        phi,
        derivs,
        frac_dual,
    })
}

/// Centers `−L/4, 0, L/4` and widths `L/8, L/4`.
pub fn bump_battery(grid: &GridSpec, params: &FracParams) -> Result<Vec<TestFunction>> {
    let l = grid.half_width;
    [
        (-l / 4.0, l / 8.0),
        (0.0, l / 8.0),
        (l / 4.0, l / 8.0),
        (0.0, l / 4.0),
        (l / 4.0, l / 4.0),
    ]
    .iter()
    .map(|&(c, w)| make_bump(c, w, grid, params))
    .collect()
}

/// `ψ^t(s) = G_{−δ}(t − s)∗φ` for `s < t` and `φ` at `s = t`, with
/// `∂_sψ^t = −D^α_{−δ}ψ^t`.
pub fn dual_test_function(
    phi: &TestFunction,
    t_index: usize,
    params: &FracParams,
    grid: &GridSpec,
) -> Result<TimeTestFunction> {
    if grid != &phi.grid {
        return domain("test function lives on a different grid");
    }
    if t_index > grid.n_steps {
        return domain(format!("t index {t_index} beyond M = {}", grid.n_steps));
    }
    let spec = Spectral::new(grid)?;
    let dual = params.dual();
    let sym = spec.symbol_multiplier(dual.alpha, dual.delta);
    let hat = spec.forward(&phi.phi)?;
    let dmult: Vec<Vec<Complex64>> = (0..=params.m).map(|k| spec.derivative_multiplier(k)).collect();
    let t = grid.time(t_index);
    let levels: Vec<(Field, Field, Field, Vec<Field>)> = (0..=t_index)
        .into_par_iter()
        .map(|l| {
            let lag = t - grid.time(l);
            let h = hat.mul(&sym.iter().map(|p| (p * lag).exp()).collect::<Vec<_>>());
            let psi = if l == t_index {
                phi.phi.clone()
            } else {
                spec.inverse(&h)?
            };
            let fd = spec.inverse(&h.mul(&sym))?;
            let ds = fd.scale(-1.0);
            let derivs = dmult
                .iter()
                .enumerate()
                .map(|(k, m)| if k == 0 { Ok(psi.clone()) } else { spec.inverse(&h.mul(m)) })
                .collect::<Result<Vec<_>>>()?;
            Ok((psi, ds, fd, derivs))
        })
        .collect::<Result<_>>()?;
    let mut out = TimeTestFunction {
        grid: *grid,
        t_index,
        psi: Vec::with_capacity(levels.len()),
        ds_psi: Vec::with_capacity(levels.len()),
        frac_dual: Vec::with_capacity(levels.len()),
        derivs: Vec::with_capacity(levels.len()),
    };
    for (p, d, f, k) in levels {
        out.psi.push(p);
        out.ds_psi.push(d);
        out.frac_dual.push(f);
        out.derivs.push(k);
    }
    Ok(out)
}

fn check_inputs(path: &PathState, sheet: &SheetIncrements, grid: &GridSpec, t_index: usize) -> Result<()> {
    if &path.grid != grid || &sheet.grid != grid {
        return domain("path, sheet and test function must share one grid");
    }
    if t_index >= path.levels.len() {
        return domain(format!("t index {t_index} beyond the path"));
    }
    Ok(())
}

pub fn weak_residual_first(
    path: &PathState,
    sheet: &SheetIncrements,
    phi: &TestFunction,
    t_index: usize,
    coeffs: &CoefficientSpec,
    params: &FracParams,
) -> Result<f64> {
    check_inputs(path, sheet, &phi.grid, t_index)?;
    Ok(residual(path, sheet, t_index, coeffs, params, false, |_| {
        (&phi.phi, &phi.frac_dual, None, &phi.derivs)
    }))
}

pub fn weak_residual_second(
    path: &PathState,
    sheet: &SheetIncrements,
    psi: &TimeTestFunction,
    coeffs: &CoefficientSpec,
    params: &FracParams,
) -> Result<f64> {
    check_inputs(path, sheet, &psi.grid, psi.t_index)?;
    if psi.derivs.first().map_or(0, |d| d.len()) < params.m + 1 {
        return domain("test function lacks derivatives up to order m");
    }
    Ok(residual(path, sheet, psi.t_index, coeffs, params, true, |l| {
        (&psi.psi[l], &psi.frac_dual[l], Some(&psi.ds_psi[l]), &psi.derivs[l])
    }))
}

fn residual<'a>(
    path: &PathState,
    sheet: &SheetIncrements,
    t_index: usize,
    coeffs: &CoefficientSpec,
    params: &FracParams,
    with_ds: bool,
    at: impl Fn(usize) -> (&'a Field, &'a Field, Option<&'a Field>, &'a Vec<Field>),
) -> f64 {
    let g = path.grid;
    let dx = g.dx();
    let dt = g.dt();
    let xs = g.xs();
    let (end_psi, ..) = at(t_index);
    let (start_psi, ..) = at(0);
    let mut r = path.levels[t_index].inner(end_psi, dx) - path.levels[0].inner(start_psi, dx);
    for n in 0..t_index {
        let u = &path.levels[n];
        let s = g.time(n);
        let (psi, fd, ds, derivs) = at(n);
        let mut det = u.inner(fd, dx);
        if with_ds {
            if let Some(ds) = ds {
                det += u.inner(ds, dx);
            }
        }
        for k in 0..=params.m {
            let h = coeffs.h(k);
            if h.is_zero() {
                continue;
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let pair: f64 = u
                .iter()
                .zip(&xs)
                .zip(derivs[k].iter())
                .map(|((&v, &x), &d)| h.eval(s, x, v) * d)
                .sum::<f64>()
                * dx;
            det += sign * pair;
        }
        r -= dt * det;
        if !coeffs.f.is_zero() {
            let dw = sheet.row(n);
            let stoch: f64 = (0..g.n_points)
                .map(|i| coeffs.f.eval(s, xs[i], u[i]) * psi[i] * dw[i])
                .sum();
            r -= stoch;
        }
    }
    r.abs()
}

/// `weak_residual_first` for each battery member.
pub fn battery_residual_first(
    path: &PathState,
    sheet: &SheetIncrements,
    battery: &[TestFunction],
    t_index: usize,
    coeffs: &CoefficientSpec,
    params: &FracParams,
) -> Result<Vec<f64>> {
    battery
        .par_iter()
        .map(|phi| weak_residual_first(path, sheet, phi, t_index, coeffs, params))
        .collect()
}

/// `weak_residual_second` for each battery member, tested with its dual function.
pub fn battery_residual_second(
    path: &PathState,
    sheet: &SheetIncrements,
    battery: &[TestFunction],
    t_index: usize,
    coeffs: &CoefficientSpec,
    params: &FracParams,
) -> Result<Vec<f64>> {
    battery
        .par_iter()
        .map(|phi| {
            let psi = dual_test_function(phi, t_index, params, &path.grid)?;
            weak_residual_second(path, sheet, &psi, coeffs, params)
        })
        .collect()
}
