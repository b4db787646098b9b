//! The Green function `G_α(t, x) = F⁻¹{exp(ψ_{α,δ}(λ) t)}` and its spatial
//! derivatives, synthesized spectrally on the periodic grid, together with
//! numerical checks of its structural properties.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::config::{is_integer, FracParams, GridSpec};
use crate::error::{domain, Result};
use crate::frac::{Field, Spectral};

/// Negative values down to this level still count as a density.
pub const POSITIVITY_TOL: f64 = 1e-9;

/// Samples of `∂^k_x G_α(t, ·)` on a grid.
#[derive(Debug, Clone)]
pub struct KernelSample {
    pub t: f64,
    pub k: usize,
    pub values: Field,
    pub params: FracParams,
    pub grid: GridSpec,
    /// Largest imaginary part discarded by the synthesis.
    pub imag_residue: f64,
}

impl KernelSample {
    /// `dx · Σ values`
    pub fn mass(&self) -> f64 {
        self.grid.dx() * self.values.iter().sum::<f64>()
    }

    /// `(dx Σ |values|^γ)^{1/γ}`
    pub fn lebesgue_norm(&self, gamma: f64) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.abs().powf(gamma)).sum();
        (self.grid.dx() * s).powf(1.0 / gamma)
    }
}

fn check_kernel_params(params: &FracParams) -> Result<()> {
    params.check_operator()?;
    let a = params.alpha;
    let ok = (a > 1.0 && !is_integer(a)) || is_integer(a) && (a.round() == 1.0 || a.round() == 2.0);
    if !ok {
        return domain(format!(
            "kernel needs alpha > 1 non-integer, or alpha in {{1, 2}}; got {a}"
        ));
    }
    Ok(())
}

/// Smallest time at which the highest resolved mode is damped by `e^{Re ψ t} < 1e-3`.
pub fn min_resolved_time(params: &FracParams, grid: &GridSpec) -> f64 {
    let lam = PI * grid.n_points as f64 / (2.0 * grid.half_width);
    let damping = lam.powf(params.alpha) * (0.5 * PI * params.delta).cos();
    1e3f64.ln() / damping
}

/// Fourier image `(-iλ_j)^k e^{ψ_j t}` of `∂^k G(t, ·)`.
pub fn kernel_spectrum(spec: &Spectral, t: f64, k: usize, params: &FracParams) -> Vec<Complex64> {
    let mut m: Vec<Complex64> = spec
        .lambdas()
        .iter()
        .map(|&l| {
            crate::frac::derivative_symbol(l, k) * (crate::frac::symbol(l, params.alpha, params.delta) * t).exp()
        })
        .collect();
    spec.project(&mut m);
    m
}

pub fn kernel(t: f64, k: usize, params: &FracParams, grid: &GridSpec) -> Result<KernelSample> {
    let spec = Spectral::new(grid)?;
    kernel_with(&spec, t, k, params)
}

pub fn kernel_with(spec: &Spectral, t: f64, k: usize, params: &FracParams) -> Result<KernelSample> {
    if !(t > 0.0) {
        return domain(format!("kernel time must be positive, got {t}"));
    }
    check_kernel_params(params)?;
    let grid = *spec.grid();
    let t_min = min_resolved_time(params, &grid);
    if t < t_min {
        return domain(format!(
            "kernel under-resolved at t = {t}: need t >= {t_min} on this grid"
        ));
    }
    let (values, imag_residue) = spec.synthesize(&kernel_spectrum(spec, t, k, params))?;
    Ok(KernelSample {
        t,
        k,
        values,
        params: params.clone(),
        grid,
        imag_residue,
    })
}

/// `n`-term large-`|x|` expansion of `∂^l_x G_α(1, x)`:
/// `(1/π) Σ_j |x|^{-αj-(l+1)} (-1)^{j+l+1}/j! Γ(αj+l+1) sin(j(α+δ)π/2)` for
/// `x > 0`. For `x < 0` the reflection `G_δ(-x) = G_{-δ}(x)` is used.
pub fn tail_series(x: f64, l: usize, n: usize, params: &FracParams) -> Result<f64> {
    if x == 0.0 || !x.is_finite() {
        return domain(format!("tail series needs finite x != 0, got {x}"));
    }
    if n == 0 {
        return domain("tail series needs at least one term");
    }
    let (delta, reflect) = if x > 0.0 {
        (params.delta, 1.0)
    } else {
        (-params.delta, if l % 2 == 0 { 1.0 } else { -1.0 })
    };
    let a = params.alpha;
    let ax = x.abs();
    let mut sum = 0.0;
    let mut fact = 1.0;
    for j in 1..=n {
        fact *= j as f64;
        let jf = j as f64;
        let sign = if (j + l + 1) % 2 == 0 { 1.0 } else { -1.0 };
        sum += ax.powf(-a * jf - (l as f64 + 1.0)) * sign / fact
            * gamma(a * jf + l as f64 + 1.0)
            * (jf * (a + delta) * 0.5 * PI).sin();
    }
    Ok(reflect * sum / PI)
}

/// Tail series at time `t` via the scaling `∂^l G(t, x) = t^{-(l+1)/α} ∂^l G(1, t^{-1/α} x)`.
pub fn tail_series_at(t: f64, x: f64, l: usize, n: usize, params: &FracParams) -> Result<f64> {
    let s = t.powf(-1.0 / params.alpha);
    Ok(s.powi(l as i32 + 1) * tail_series(s * x, l, n, params)?)
}

/// `max_i |G(t+s, x_i) − dx Σ_ξ G(t, ξ) G(s, x_i − ξ)|`, the convolution
/// evaluated as a direct periodic sum in physical space.
pub fn check_semigroup(t: f64, s: f64, params: &FracParams, grid: &GridSpec) -> Result<f64> {
    if !(t > 0.0 && s > 0.0) {
        return domain("semigroup check needs t, s > 0");
    }
    let spec = Spectral::new(grid)?;
    let gt = kernel_with(&spec, t, 0, params)?;
    let gs = kernel_with(&spec, s, 0, params)?;
    let gts = kernel_with(&spec, t + s, 0, params)?;
    let conv = periodic_convolution(&gt.values, &gs.values, grid.dx());
    Ok(conv
        .iter()
        .zip(gts.values.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// `(a ∗ b)(x_i) = dx Σ_l a(x_l) b(x_i − x_l)` on the torus.
pub fn periodic_convolution(a: &[f64], b: &[f64], dx: f64) -> Vec<f64> {
    let n = a.len();
    let half = n / 2;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for (l, av) in a.iter().enumerate() {
                // x_i - x_l = (i - l) dx sits at index i - l + N/2
                let m = (i + half + n - l) % n;
                acc += av * b[m];
            }
            dx * acc
        })
        .collect()
}

/// `max_i |∂^l G(t, x_i) − t^{-(l+1)/α} ∂^l G(1, t^{-1/α} x_i)|`. The right
/// side is synthesized on the torus rescaled by `t^{-1/α}`, whose nodes are
/// exactly the points `t^{-1/α} x_i`.
pub fn check_scaling(t: f64, l: usize, params: &FracParams, grid: &GridSpec) -> Result<f64> {
    if !(t > 0.0) {
        return domain("scaling check needs t > 0");
    }
    let left = kernel(t, l, params, grid)?;
    let s = t.powf(-1.0 / params.alpha);
    let scaled = GridSpec {
        half_width: grid.half_width * s,
        ..*grid
    };
    let right = kernel(1.0, l, params, &scaled)?;
    let factor = s.powi(l as i32 + 1);
    Ok(left
        .values
        .iter()
        .zip(right.values.iter())
        .map(|(a, b)| (a - factor * b).abs())
        .fold(0.0, f64::max))
}

/// Minimum kernel value and whether it is a density up to [`POSITIVITY_TOL`].
pub fn check_positivity(t: f64, params: &FracParams, grid: &GridSpec) -> Result<(f64, bool)> {
    let g = kernel(t, 0, params, grid)?;
    let min = g.values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((min, min >= -POSITIVITY_TOL))
}

/// Exponent `(1 − (k+1)γ)/(αγ)` of `t` in `|∂^k G(t, ·)|_γ`.
pub fn norm_exponent(alpha: f64, gamma: f64, k: usize) -> Result<f64> {
    let lower = 1.0 / (alpha + k as f64 + 1.0);
    if !(gamma > lower) {
        return domain(format!("gamma must exceed {lower}, got {gamma}"));
    }
    Ok((1.0 - (k as f64 + 1.0) * gamma) / (alpha * gamma))
}

/// Log–log regression slope of `|∂^k G(t, ·)|_γ` against `t`.
pub fn measure_norm_slope(
    gamma: f64,
    k: usize,
    params: &FracParams,
    grid: &GridSpec,
    t_list: &[f64],
) -> Result<f64> {
    norm_exponent(params.alpha, gamma, k)?;
    if t_list.len() < 2 {
        return domain("need at least two times");
    }
    let lo = t_list.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = t_list.iter().copied().fold(0.0, f64::max);
    if !(lo > 0.0) || hi / lo < 4.0 - 1e-12 {
        return domain("times must be positive and span at least a factor 4");
    }
    let spec = Spectral::new(grid)?;
    let points: Vec<(f64, f64)> = t_list
        .par_iter()
        .map(|&t| kernel_with(&spec, t, k, params).map(|g| (t.ln(), g.lebesgue_norm(gamma).ln())))
        .collect::<Result<_>>()?;
    Ok(regression_slope(&points))
}

/// Least-squares slope of `y` on `x`.
pub fn regression_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Closed-form kernels for `α = 2` and `α = 1` (both with `δ = 0`).
pub mod oracle {
    use std::f64::consts::PI;

    /// `(4πt)^{-1/2} e^{-x²/(4t)}`
    pub fn gaussian(t: f64, x: f64) -> f64 {
        (-x * x / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()
    }

    /// Gaussian summed over its periodic images `x + 2Ln`.
    pub fn periodic_gaussian(t: f64, x: f64, half_width: f64) -> f64 {
        let reach = ((40.0 * t).sqrt() * 8.0 / (2.0 * half_width)).ceil() as i64 + 1;
        (-reach..=reach)
            .map(|n| gaussian(t, x + 2.0 * half_width * n as f64))
            .sum()
    }

    /// `t / (π (t² + x²))`
    pub fn cauchy(t: f64, x: f64) -> f64 {
        t / (PI * (t * t + x * x))
    }

    /// Cauchy kernel summed over all periodic images, in closed form:
    /// `(1/2L) sinh(πt/L) / (cosh(πt/L) − cos(πx/L))`.
    pub fn periodic_cauchy(t: f64, x: f64, half_width: f64) -> f64 {
        let a = PI * t / half_width;
        let b = PI * x / half_width;
        // cosh a − cos b = 2 sinh²(a/2) + 2 sin²(b/2), cancellation-free
        let denom = 2.0 * (a / 2.0).sinh().powi(2) + 2.0 * (b / 2.0).sin().powi(2);
        a.sinh() / denom / (2.0 * half_width)
    }
}
