//! Per-mode exponential step weights shared by the time integrators.

use num_complex::Complex64;

/// `(e^{w} − 1)/w`, with a series near `w = 0`.
pub fn phi1(w: Complex64) -> Complex64 {
    if w.norm() < 1e-2 {
        // 1 + w/2 + w²/6 + … + w⁶/5040
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 2..=7 {
            term = term * w / k as f64;
            sum += term;
        }
        sum
    } else {
        (w.exp() - 1.0) / w
    }
}

/// `∫_0^{dt} e^{z s} ds`
pub fn step_integral(z: Complex64, dt: f64) -> Complex64 {
    dt * phi1(z * dt)
}

/// Gain applied to a cell increment of variance `dt·dx` so that the step
/// reproduces `∫_0^{dt} |e^{z s}|² ds` exactly:
/// `sqrt((e^{2a dt} − 1)/(2a dt))` with `a = Re z`.
pub fn noise_gain(re_z: f64, dt: f64) -> f64 {
    let w = 2.0 * re_z * dt;
    if w.abs() < 1e-12 {
        1.0
    } else {
        (w.exp_m1() / w).sqrt()
    }
}

/// `2L (1 − e^{2at}) / (−2a)` (or `2L t` at `a = 0`): the variance at time
/// `t` of a mode with `Re z = a` driven by increments of variance `2L·dt`.
pub fn ou_mode_variance(re_z: f64, t: f64, half_width: f64) -> f64 {
    let w = 2.0 * re_z * t;
    if w.abs() < 1e-12 {
        2.0 * half_width * t
    } else {
        2.0 * half_width * t * (w.exp_m1() / w)
    }
}
