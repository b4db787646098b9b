//! Fractional symbol, discrete Fourier conventions, and spectral operators.
//!
//! A [`SpectralField`] holds `coeffs_j = dx · Σ_i e^{iλ_j x_i} f(x_i)` for
//! `λ_j = π j / L`, `j ∈ {-N/2, …, N/2 - 1}`, stored in FFT slot order
//! (slot `k` holds `j = k` for `k < N/2` and `j = k - N` otherwise). The
//! synthesis is `f(x_i) = (1/2L) Σ_j e^{-iλ_j x_i} coeffs_j`.
//!
//! The Nyquist slot `j = -N/2` has no conjugate partner. Every multiplier is
//! replaced by its real part there so that real fields stay real.

use std::f64::consts::PI;
use std::ops::{Deref, DerefMut};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::config::{FracParams, GridSpec};
use crate::error::{domain, FspdeError, Result};

/// Real values on the spatial grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Field(pub Vec<f64>);

impl Field {
    pub fn zeros(n: usize) -> Self {
        Field(vec![0.0; n])
    }

    pub fn from_fn(grid: &GridSpec, f: impl Fn(f64) -> f64) -> Self {
        Field((0..grid.n_points).map(|i| f(grid.x(i))).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// `dx · Σ f g`
    pub fn inner(&self, other: &[f64], dx: f64) -> f64 {
        dx * self.iter().zip(other).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn l2_norm(&self, dx: f64) -> f64 {
        self.inner(self, dx).sqrt()
    }

    pub fn l1_norm(&self, dx: f64) -> f64 {
        dx * self.iter().map(|v| v.abs()).sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn add(&self, other: &[f64]) -> Field {
        Field(self.iter().zip(other).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &[f64]) -> Field {
        Field(self.iter().zip(other).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: f64) -> Field {
        Field(self.iter().map(|a| a * s).collect())
    }
}

impl Deref for Field {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Field {
    fn from(v: Vec<f64>) -> Self {
        Field(v)
    }
}

/// Discrete Fourier image in FFT slot order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField(pub Vec<Complex64>);

impl SpectralField {
    pub fn zeros(n: usize) -> Self {
        SpectralField(vec![Complex64::new(0.0, 0.0); n])
    }

    /// Largest violation of `c_{-j} = conj(c_j)` (and of a real Nyquist mode).
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.0.len();
        let mut worst = self.0[0].im.abs().max(self.0[n / 2].im.abs());
        for k in 1..n / 2 {
            worst = worst.max((self.0[k] - self.0[n - k].conj()).norm());
        }
        worst
    }

    pub fn mul(&self, m: &[Complex64]) -> SpectralField {
        SpectralField(self.0.iter().zip(m).map(|(a, b)| a * b).collect())
    }
}

impl Deref for SpectralField {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl DerefMut for SpectralField {
    fn deref_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }
}

/// `ψ_{α,δ}(λ) = -|λ|^α exp(-iδ(π/2) sgn λ)` with `sgn 0 = 0`.
pub fn symbol(lambda: f64, alpha: f64, delta: f64) -> Complex64 {
    if lambda == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let phase = -delta * 0.5 * PI * lambda.signum();
    -lambda.abs().powf(alpha) * Complex64::from_polar(1.0, phase)
}

/// `(-iλ)^k`, the Fourier multiplier of `∂^k_x` under `F f = ∫ e^{ixλ} f`.
pub fn derivative_symbol(lambda: f64, k: usize) -> Complex64 {
    Complex64::new(0.0, -lambda).powu(k as u32)
}

/// FFT plans and frequency data for one grid.
#[derive(Clone)]
pub struct Spectral {
    grid: GridSpec,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    lambda: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: &GridSpec) -> Result<Self> {
        grid.check()?;
        let mut planner = FftPlanner::new();
        let n = grid.n_points;
        Ok(Self {
            grid: *grid,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            lambda: (0..n).map(|k| grid.lambda(k)).collect(),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.grid.n_points == 0
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.grid.n_points {
            return Err(FspdeError::Shape {
                expected: self.grid.n_points,
                got,
            });
        }
        Ok(())
    }

    /// `Σ_i e^{iλ_j x_i} v_i` with no cell-width factor. This is the
    /// transform used for noise sums.
    pub fn sum_transform(&self, v: &[f64]) -> Result<Vec<Complex64>> {
        self.check_len(v.len())?;
        let mut buf: Vec<Complex64> = v.iter().map(|&a| Complex64::new(a, 0.0)).collect();
        // e^{iλ_j x_i} = (-1)^j e^{2πi j i / N}; rustfft's inverse is the
        // unnormalized e^{+2πi} sum.
        self.inv.process(&mut buf);
        for (k, c) in buf.iter_mut().enumerate() {
            if k % 2 == 1 {
                *c = -*c;
            }
        }
        Ok(buf)
    }

    pub fn forward(&self, f: &[f64]) -> Result<SpectralField> {
        let dx = self.grid.dx();
        let mut c = self.sum_transform(f)?;
        c.iter_mut().for_each(|v| *v *= dx);
        Ok(SpectralField(c))
    }

    /// Synthesis returning the real part and the largest imaginary residue.
    pub fn synthesize(&self, s: &[Complex64]) -> Result<(Field, f64)> {
        self.check_len(s.len())?;
        let scale = 1.0 / (2.0 * self.grid.half_width);
        let mut buf: Vec<Complex64> = s
            .iter()
            .enumerate()
            .map(|(k, &c)| if k % 2 == 1 { -c } else { c })
            .collect();
        self.fwd.process(&mut buf);
        let mut residue: f64 = 0.0;
        let vals = buf
            .iter()
            .map(|c| {
                residue = residue.max((c.im * scale).abs());
                c.re * scale
            })
            .collect();
        Ok((Field(vals), residue))
    }

    pub fn inverse(&self, s: &SpectralField) -> Result<Field> {
        Ok(self.synthesize(s)?.0)
    }

    /// Trigonometric interpolant of `s` evaluated at an arbitrary point, by
    /// direct summation over modes.
    pub fn eval_at(&self, s: &[Complex64], x: f64) -> f64 {
        let scale = 1.0 / (2.0 * self.grid.half_width);
        let nyq = self.grid.nyquist_slot();
        let mut acc = 0.0;
        for (k, (&c, &lam)) in s.iter().zip(&self.lambda).enumerate() {
            let e = Complex64::from_polar(1.0, -lam * x);
            let term = c * e;
            // The Nyquist mode is synthesized through its real part, which
            // off-grid means the cosine interpolant.
            if k == nyq {
                acc += c.re * (lam * x).cos();
            } else {
                acc += term.re;
            }
        }
        acc * scale
    }

    /// Real part at the Nyquist slot.
    pub fn project(&self, m: &mut [Complex64]) {
        let k = self.grid.nyquist_slot();
        m[k] = Complex64::new(m[k].re, 0.0);
    }

    /// Multiplier of `∂^k_x` on this grid.
    pub fn derivative_multiplier(&self, k: usize) -> Vec<Complex64> {
        let mut m: Vec<Complex64> = self.lambda.iter().map(|&l| derivative_symbol(l, k)).collect();
        self.project(&mut m);
        m
    }

    /// Multiplier of `D^α_δ` on this grid.
    pub fn symbol_multiplier(&self, alpha: f64, delta: f64) -> Vec<Complex64> {
        let mut m: Vec<Complex64> = self.lambda.iter().map(|&l| symbol(l, alpha, delta)).collect();
        self.project(&mut m);
        m
    }

    pub fn apply_multiplier(&self, f: &[f64], m: &[Complex64]) -> Result<Field> {
        self.check_len(m.len())?;
        let s = self.forward(f)?;
        self.inverse(&s.mul(m))
    }

    pub fn derivative(&self, f: &[f64], k: usize) -> Result<Field> {
        if k == 0 {
            self.check_len(f.len())?;
            return Ok(Field(f.to_vec()));
        }
        self.apply_multiplier(f, &self.derivative_multiplier(k))
    }
}

/// Per-mode symbols of the operator and of the drift of the linear model.
#[derive(Debug, Clone)]
pub struct SymbolTable {
    /// `ψ_{α,δ}(λ_j)`
    pub psi: Vec<Complex64>,
    /// `Σ_k c_k (-iλ_j)^k`
    pub drift_sym: Vec<Complex64>,
}

impl SymbolTable {
    pub fn new(spec: &Spectral, params: &FracParams) -> Result<Self> {
        params.check_operator()?;
        let psi = spec.symbol_multiplier(params.alpha, params.delta);
        let mut drift_sym: Vec<Complex64> = spec
            .lambdas()
            .iter()
            .map(|&l| {
                params
                    .drift
                    .iter()
                    .enumerate()
                    .map(|(k, &c)| c * derivative_symbol(l, k))
                    .sum()
            })
            .collect();
        spec.project(&mut drift_sym);
        Ok(Self { psi, drift_sym })
    }

    /// `ψ_j + drift_j`, the per-mode generator of the linear model.
    pub fn generator(&self) -> Vec<Complex64> {
        self.psi.iter().zip(&self.drift_sym).map(|(a, b)| a + b).collect()
    }
}

/// `D^α_δ f = F⁻¹(ψ_{α,δ} · F f)`.
pub fn frac_derivative(spec: &Spectral, f: &[f64], params: &FracParams) -> Result<Field> {
    params.check_operator()?;
    spec.apply_multiplier(f, &spec.symbol_multiplier(params.alpha, params.delta))
}

/// `|⟨D^α_δ f, g⟩ − ⟨f, D^α_{−δ} g⟩|` with `⟨a, b⟩ = dx Σ a b`.
pub fn adjoint_check(spec: &Spectral, f: &[f64], g: &[f64], params: &FracParams) -> Result<f64> {
    let dx = spec.grid().dx();
    let df = frac_derivative(spec, f, params)?;
    let dg = frac_derivative(spec, g, &params.dual())?;
    Ok((df.inner(g, dx) - Field(f.to_vec()).inner(&dg, dx)).abs())
}

/// Same as [`adjoint_check`] for fields given by their Fourier images. The
/// images must be Hermitian (images of real fields).
pub fn adjoint_check_spectral(
    spec: &Spectral,
    f: &SpectralField,
    g: &SpectralField,
    params: &FracParams,
) -> Result<f64> {
    let tol = 1e-12 * (1.0 + f.iter().chain(g.iter()).fold(0.0f64, |m, c| m.max(c.norm())));
    if f.hermitian_defect() > tol || g.hermitian_defect() > tol {
        return domain("adjoint check requires Fourier images of real fields");
    }
    let f = spec.inverse(f)?;
    let g = spec.inverse(g)?;
    adjoint_check(spec, &f, &g, params)
}
