//! Numerical laboratory for the one-dimensional stochastic fractional PDE
//!
//! ```text
//! u_t = D^α_δ u + Σ_k ∂^k h_k(t, x, u) + f(t, x, u) Ẇ
//! ```
//!
//! posed on a periodic truncation `[-L, L)` of the real line. The crate
//! evaluates the fractional Green function `G_α(t, x)` and its structural
//! properties, samples two-sided space-time white noise, solves the linear
//! equation mode-by-mode as a generalized Ornstein-Uhlenbeck process, solves
//! the nonlinear equation by Picard iteration of the mild-solution operator,
//! and measures residuals of the two weak formulations.
//!
//! All Fourier work uses the transform pair
//! `F f(λ) = ∫ e^{ixλ} f(x) dx`, `F⁻¹ g(x) = (1/2π) ∫ e^{-ixλ} g(λ) dλ`,
//! discretized as described on [`SpectralField`].

pub mod config;
pub mod etd;
pub mod error;
pub mod frac;
pub mod harness;
pub mod kernel;
pub mod linear;
pub mod mild;
pub mod noise;
pub mod weak;

pub use config::{
    delta_bound, even_part, validate, Coefficient, CoefficientSpec, FracParams, GridSpec,
    ValidationMode, ValidationReport,
};
pub use error::{FspdeError, Result};
pub use frac::{Field, Spectral, SpectralField, SymbolTable};
pub use kernel::KernelSample;
pub use linear::{LinearModel, Trajectory};
pub use mild::{PathState, PicardDiagnostics, PicardOptions};
pub use noise::{SheetIncrements, SpectralNoise};
pub use weak::{TestFunction, TimeTestFunction};
