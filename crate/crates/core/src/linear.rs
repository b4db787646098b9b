//! The linear equation `u_t = D^α_δ u + Σ c_k ∂^k u + f Ẇ` solved mode by
//! mode. Each Fourier mode is an Ornstein-Uhlenbeck process
//!
//! ```text
//! dû_j = (ψ_j + Σ c_k (−iλ_j)^k) û_j dt + dη_j
//! ```
//!
//! stepped with its exact per-step factor `e^{z_j dt}`. The cell increment
//! `Σ_i e^{iλ_j y_i} f(t_n, y_i) dW[n][i]` enters with the gain from
//! [`crate::etd::noise_gain`], which makes the per-step variance exact for
//! time-independent `f`.

use num_complex::Complex64;

use crate::config::{Coefficient, FracParams, GridSpec};
use crate::error::{domain, FspdeError, Result};
use crate::etd::noise_gain;
use crate::frac::{Field, Spectral, SpectralField, SymbolTable};
use crate::noise::{weighted_increment, SheetIncrements};

/// Linear model: operator with drift constants, a `u`-independent noise
/// coefficient `f(s, y)`, and initial data.
#[derive(Debug, Clone)]
pub struct LinearModel {
    pub params: FracParams,
    pub f: Coefficient,
    pub u0: Field,
}

impl LinearModel {
    pub fn new(params: FracParams, f: Coefficient, u0: Field) -> Result<Self> {
        if f.depends_on_u() == Some(true) {
            return domain(format!("linear model needs f independent of u, got {f}"));
        }
        params.check_operator()?;
        Ok(Self { params, f, u0 })
    }
}

/// A solved path: physical and spectral states at every grid time.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: GridSpec,
    pub times: Vec<f64>,
    pub states: Vec<Field>,
    pub spectral_states: Vec<SpectralField>,
    /// `(seed, stream)` of the driving sheet.
    pub noise_ref: (u64, u64),
}

impl Trajectory {
    pub fn from_states(spec: &Spectral, states: Vec<Field>, sheet: &SheetIncrements) -> Result<Self> {
        let spectral_states = states.iter().map(|s| spec.forward(s)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: *spec.grid(),
            times: spec.grid().times(),
            states,
            spectral_states,
            noise_ref: (sheet.seed, sheet.stream),
        })
    }

    pub fn final_state(&self) -> &Field {
        self.states.last().expect("trajectory has at least one level")
    }

    /// `max_n |self(t_n) − other(t_n)|₂ / max_n |other(t_n)|₂`
    pub fn rel_l2_diff(&self, other: &[Field]) -> f64 {
        let dx = self.grid.dx();
        let mut num: f64 = 0.0;
        let mut den: f64 = 0.0;
        for (a, b) in self.states.iter().zip(other) {
            num = num.max(a.sub(b).l2_norm(dx));
            den = den.max(b.l2_norm(dx));
        }
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }
}

fn check_sheet(grid: &GridSpec, sheet: &SheetIncrements) -> Result<()> {
    if &sheet.grid != grid {
        return domain("noise sheet lives on a different grid");
    }
    Ok(())
}

/// Per-mode generator `z_j = ψ_j + drift_j`, rejected if any mode grows.
pub fn stable_generator(spec: &Spectral, params: &FracParams) -> Result<Vec<Complex64>> {
    let z = SymbolTable::new(spec, params)?.generator();
    if let Some((k, zk)) = z.iter().enumerate().find(|(_, z)| z.re > 1e-12) {
        return Err(FspdeError::Instability {
            level: 0,
            detail: format!(
                "mode j = {} has Re(psi + drift) = {} > 0",
                spec.grid().freq_index(k),
                zk.re
            ),
        });
    }
    Ok(z)
}

pub fn evolve_linear(model: &LinearModel, grid: &GridSpec, sheet: &SheetIncrements) -> Result<Trajectory> {
    let spec = Spectral::new(grid)?;
    evolve_linear_with(&spec, model, sheet)
}

pub fn evolve_linear_with(spec: &Spectral, model: &LinearModel, sheet: &SheetIncrements) -> Result<Trajectory> {
    let grid = *spec.grid();
    check_sheet(&grid, sheet)?;
    let z = stable_generator(spec, &model.params)?;
    let dt = grid.dt();
    let step: Vec<Complex64> = z.iter().map(|z| (z * dt).exp()).collect();
    let gain: Vec<f64> = z.iter().map(|z| noise_gain(z.re, dt)).collect();
    let xs = grid.xs();
    let f_is_zero = model.f.is_zero();

    let mut hat = spec.forward(&model.u0)?;
    let mut spectral_states = Vec::with_capacity(grid.n_steps + 1);
    spectral_states.push(hat.clone());
    for n in 0..grid.n_steps {
        let t = grid.time(n);
        let incr = if f_is_zero {
            None
        } else {
            let fv: Vec<f64> = xs.iter().map(|&y| model.f.eval(t, y, 0.0)).collect();
            Some(weighted_increment(spec, sheet.row(n), &fv)?)
        };
        for k in 0..hat.len() {
            let mut v = step[k] * hat[k];
            if let Some(d) = &incr {
                v += gain[k] * d[k];
            }
            hat[k] = v;
        }
        spectral_states.push(hat.clone());
    }
    let states = spectral_states
        .iter()
        .map(|s| spec.inverse(s))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        grid,
        times: grid.times(),
        states,
        spectral_states,
        noise_ref: (sheet.seed, sheet.stream),
    })
}

/// Largest residual of the integrated mode equation
/// `û_j(t_n) = û_j(0) + z_j ∫_0^{t_n} û_j ds + η_j(t_n)` over modes and
/// times, with the time integral taken as a left-endpoint sum.
pub fn residual_integral_form(model: &LinearModel, traj: &Trajectory, sheet: &SheetIncrements) -> Result<f64> {
    check_sheet(&traj.grid, sheet)?;
    if traj.noise_ref != (sheet.seed, sheet.stream) {
        return domain("trajectory was produced with a different noise path");
    }
    let grid = traj.grid;
    let spec = Spectral::new(&grid)?;
    let z = stable_generator(&spec, &model.params)?;
    let dt = grid.dt();
    let xs = grid.xs();
    let n_modes = grid.n_points;
    let u0 = &traj.spectral_states[0];
    let mut quad = vec![Complex64::new(0.0, 0.0); n_modes];
    let mut eta = vec![Complex64::new(0.0, 0.0); n_modes];
    let mut worst: f64 = 0.0;
    for n in 0..grid.n_steps {
        let t = grid.time(n);
        let cur = &traj.spectral_states[n];
        if !model.f.is_zero() {
            let fv: Vec<f64> = xs.iter().map(|&y| model.f.eval(t, y, 0.0)).collect();
            let d = weighted_increment(&spec, sheet.row(n), &fv)?;
            eta.iter_mut().zip(&d).for_each(|(e, v)| *e += v);
        }
        quad.iter_mut().zip(cur.iter()).for_each(|(q, u)| *q += dt * u);
        let next = &traj.spectral_states[n + 1];
        for k in 0..n_modes {
            let r = next[k] - u0[k] - z[k] * quad[k] - eta[k];
            worst = worst.max(r.norm());
        }
    }
    Ok(worst)
}
