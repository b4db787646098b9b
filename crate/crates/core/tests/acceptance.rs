//! End-to-end acceptance checks. Runs as a plain binary (no libtest
//! harness) so every criterion prints exactly one PASS/FAIL line.
//!
//! Reference values come from closed forms and direct sums written here,
//! not from the library's own oracle helpers.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use fspde::config::{Coefficient, CoefficientSpec, FracParams, GridSpec};
use fspde::frac::{Field, Spectral};
use fspde::harness::{run_mc_with, InitialData, McOptions, ModelKind, RunConfig};
use fspde::kernel::{check_positivity, check_scaling, check_semigroup, kernel};
use fspde::linear::{evolve_linear, LinearModel};
use fspde::mild::{linear_coefficients, InitialGuess, MildOperator, PicardOptions};
use fspde::noise::{sample_sheet, SheetIncrements};
use fspde::weak::{battery_residual_first, battery_residual_second, bump_battery, dual_test_function, make_bump};

type Outcome = Result<String, String>;

// ---------------------------------------------------------------- oracles

fn psi(lambda: f64, alpha: f64, delta: f64) -> (f64, f64) {
    // −|λ|^α e^{−iδπ/2 sgn λ}
    if lambda == 0.0 {
        return (0.0, 0.0);
    }
    let mag = lambda.abs().powf(alpha);
    let ang = -delta * PI / 2.0 * lambda.signum();
    (-mag * ang.cos(), -mag * ang.sin())
}

fn lambda_of(j: i64, half_width: f64) -> f64 {
    PI * j as f64 / half_width
}

/// Green function on the torus by direct summation over modes
/// `j = −N/2 .. N/2−1`, the Nyquist mode entering through its real part.
fn kernel_direct(t: f64, x: f64, alpha: f64, delta: f64, half_width: f64, n: usize) -> f64 {
    let half = n as i64 / 2;
    let mut acc = 0.0;
    for j in -half..half {
        let lam = lambda_of(j, half_width);
        let (re, im) = psi(lam, alpha, delta);
        let amp = (re * t).exp();
        // Re(e^{−iλx} e^{i·im·t})
        let phase = im * t - lam * x;
        acc += if j == -half { amp * (im * t).cos() * (lam * x).cos() } else { amp * phase.cos() };
    }
    acc / (2.0 * half_width)
}

fn gaussian(t: f64, x: f64) -> f64 {
    (-x * x / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()
}

/// Cauchy density summed over images `x + 2Ln`; geometric-series closed form.
fn cauchy_periodic(t: f64, x: f64, half_width: f64) -> f64 {
    let q = (-PI * t / half_width).exp();
    let c = (PI * x / half_width).cos();
    (1.0 - q * q) / (1.0 - 2.0 * q * c + q * q) / (2.0 * half_width)
}

fn gamma_fn(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Large-`x` series of `G(1, x)` with `terms` terms; `x < 0` via the
/// mirror image with flipped skewness.
fn tail(x: f64, alpha: f64, delta: f64, terms: usize) -> f64 {
    let (ax, d) = if x > 0.0 { (x, delta) } else { (-x, -delta) };
    let mut s = 0.0;
    let mut fact = 1.0;
    for j in 1..=terms {
        let jf = j as f64;
        fact *= jf;
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        s += sign / fact * gamma_fn(alpha * jf + 1.0) * (jf * (alpha + d) * PI / 2.0).sin() * ax.powf(-alpha * jf - 1.0);
    }
    s / PI
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let num: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    num / den
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join("/")
}

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn nonlinear_model() -> (FracParams, CoefficientSpec) {
    (
        FracParams::new(1.8, 0.1, 1),
        CoefficientSpec::new(Coefficient::Sin, vec![Coefficient::Zero, Coefficient::Linear(0.1)], 1.1),
    )
}

fn bell(g: &GridSpec) -> Field {
    Field::from_fn(g, |x| (-x * x).exp())
}

// ---------------------------------------------------------------- criteria

fn kernel_oracles() -> Outcome {
    let g = GridSpec::new(20.0, 1024, 1.0, 1);
    let gauss = kernel(1.0, 0, &FracParams::new(2.0, 0.0, 0), &g).map_err(|e| e.to_string())?;
    let mut worst_g: f64 = 0.0;
    for (i, &v) in gauss.values.iter().enumerate() {
        let x = g.x(i);
        if x.abs() <= 8.0 {
            worst_g = worst_g.max(((v - gaussian(1.0, x)) / gaussian(1.0, x)).abs());
        }
    }
    let cauchy = kernel(1.0, 0, &FracParams::new(1.0, 0.0, 0), &g).map_err(|e| e.to_string())?;
    let (mut worst_c, mut worst_c_inner): (f64, f64) = (0.0, 0.0);
    let mut wrap: f64 = 0.0;
    for (i, &v) in cauchy.values.iter().enumerate() {
        let x = g.x(i);
        let want = cauchy_periodic(1.0, x, 20.0);
        let rel = ((v - want) / want).abs();
        worst_c = worst_c.max(rel);
        if x.abs() <= 10.0 {
            worst_c_inner = worst_c_inner.max(rel);
            let free = 1.0 / (PI * (1.0 + x * x));
            wrap = wrap.max(((want - free) / free).abs());
        }
    }
    check(worst_g < 1e-8, format!("gaussian rel err {worst_g:.2e}"))?;
    check(worst_c < 1e-4, format!("cauchy global rel err {worst_c:.2e}"))?;
    check(worst_c_inner < 1e-6, format!("cauchy |x|<=L/2 rel err {worst_c_inner:.2e}"))?;
    Ok(format!(
        "gaussian {worst_g:.1e}, cauchy {worst_c:.1e} / {worst_c_inner:.1e} (image sum accounts for {wrap:.1e} rel at |x|<=L/2)"
    ))
}

fn kernel_properties() -> Outcome {
    let g = GridSpec::new(20.0, 1024, 1.0, 1);
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    let mut verdicts = Vec::new();
    for alpha in [1.3, 1.5, 1.8, 2.5] {
        let bound = fspde::delta_bound(alpha).map_err(|e| e.to_string())?;
        for delta in [0.0, 0.25 * bound, bound] {
            let p = FracParams::new(alpha, delta, 0);
            let s = kernel(1.0, 0, &p, &g).map_err(|e| e.to_string())?;
            let mass = (g.dx() * s.values.iter().sum::<f64>() - 1.0).abs();
            let semi = check_semigroup(0.5, 0.5, &p, &g).map_err(|e| e.to_string())?;
            let scale = check_scaling(2.0, 0, &p, &g).map_err(|e| e.to_string())?;
            worst.0 = worst.0.max(mass);
            worst.1 = worst.1.max(semi);
            worst.2 = worst.2.max(scale);
            let (min, density) = check_positivity(1.0, &p, &g).map_err(|e| e.to_string())?;
            let expect_density = alpha <= 2.0;
            check(
                density == expect_density,
                format!("alpha {alpha} delta {delta}: density verdict {density}, min {min:.3e}"),
            )?;
            if alpha > 2.0 {
                verdicts.push(format!("{min:.3}"));
            }
        }
    }
    check(worst.0 < 1e-10, format!("mass err {:.2e}", worst.0))?;
    check(worst.1 < 1e-8, format!("semigroup err {:.2e}", worst.1))?;
    check(worst.2 < 1e-8, format!("scaling err {:.2e}", worst.2))?;
    Ok(format!(
        "mass {:.1e}, semigroup {:.1e}, scaling {:.1e}; alpha=2.5 minima {}",
        worst.0,
        worst.1,
        worst.2,
        verdicts.join(", ")
    ))
}

fn tail_asymptotics() -> Outcome {
    let (l, n, alpha) = (160.0, 1024usize, 1.5);
    let g = GridSpec::new(l, n, 1.0, 1);
    let mut out = Vec::new();
    for delta in [0.0, 0.4] {
        // Torus kernel minus the contribution of the far images, which the
        // 3-term series describes to high accuracy at |x| >= 2L − L/2.
        let free = |x: f64| {
            let mut v = kernel_direct(1.0, x, alpha, delta, l, n);
            for m in 1..=400 {
                let m = m as f64;
                v -= tail(x + 2.0 * l * m, alpha, delta, 3) + tail(x - 2.0 * l * m, alpha, delta, 3);
            }
            v
        };
        let rel = |x: f64| ((tail(x, alpha, delta, 1) - free(x)) / free(x)).abs();
        // crossover: bisection on rel(x) = 2% between 2 and L/2
        let (mut lo, mut hi) = (2.0, l / 2.0);
        check(rel(hi) < 0.02, format!("delta {delta}: no crossover below L/2"))?;
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if rel(mid) < 0.02 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let x_star = hi;

        let s = kernel(1.0, 0, &FracParams::new(alpha, delta, 0), &g).map_err(|e| e.to_string())?;
        let mut worst: f64 = 0.0;
        let mut pts = Vec::new();
        for (i, &v) in s.values.iter().enumerate() {
            let x = g.x(i);
            if x >= x_star && x <= l / 2.0 {
                let mut corrected = v;
                for m in 1..=400 {
                    let m = m as f64;
                    corrected -= tail(x + 2.0 * l * m, alpha, delta, 3) + tail(x - 2.0 * l * m, alpha, delta, 3);
                }
                worst = worst.max(((tail(x, alpha, delta, 1) - corrected) / corrected).abs());
                if x <= 2.0 * x_star {
                    pts.push((x.ln(), corrected.ln()));
                }
            }
        }
        let sl = slope(&pts);
        let target = -(alpha + 1.0);
        check(worst < 0.02, format!("delta {delta}: rel err {worst:.3} beyond x* = {x_star:.2}"))?;
        check(
            ((sl - target) / target).abs() < 0.03,
            format!("delta {delta}: slope {sl:.4} vs {target}"),
        )?;
        out.push(format!("delta {delta}: x* {x_star:.1}, max rel {worst:.4}, slope {sl:.3}"));
    }
    Ok(out.join("; "))
}

fn norm_exponents() -> Outcome {
    let g = GridSpec::new(20.0, 1024, 1.0, 1);
    let alpha = 1.5;
    let mut out = Vec::new();
    for delta in [0.0, 0.3] {
        let p = FracParams::new(alpha, delta, 0);
        for (k, gamma) in [(0usize, 2.0f64), (1, 1.0), (1, 2.0)] {
            let pts: Vec<(f64, f64)> = [0.5, 1.0, 2.0]
                .iter()
                .map(|&t| {
                    let s = kernel(t, k, &p, &g).unwrap();
                    let norm = (g.dx() * s.values.iter().map(|v| v.abs().powf(gamma)).sum::<f64>()).powf(1.0 / gamma);
                    (t.ln(), norm.ln())
                })
                .collect();
            let sl = slope(&pts);
            let want = (1.0 - (k as f64 + 1.0) * gamma) / (alpha * gamma);
            check(
                ((sl - want) / want).abs() < 0.01,
                format!("delta {delta} (k={k}, gamma={gamma}): slope {sl:.5} vs {want:.5}"),
            )?;
            out.push(format!("{sl:.4}/{want:.4}"));
        }
    }
    Ok(format!("slopes {}", out.join(" ")))
}

fn noise_law() -> Outcome {
    let g = GridSpec::new(4.0, 32, 2.0, 8);
    let n_paths = 10_000u64;
    // ((t, x), (s, y), covariance)
    let cov = |t: f64, x: f64, s: f64, y: f64| 0.25 * (x.signum() + y.signum()).powi(2) * t.min(s) * x.abs().min(y.abs());
    let probes = [
        (1.0, 1.0, 2.0, 2.0),
        (2.0, -1.0, 1.0, -3.0),
        (0.5, 2.0, 2.0, 0.5),
        (2.0, 3.0, 2.0, 3.0),
        (1.0, -2.0, 1.5, -2.0),
        (2.0, 1.0, 2.0, -1.0),
    ];
    let spec = Spectral::new(&g).map_err(|e| e.to_string())?;
    let modes = [0usize, 1, 4, 8, 16];
    let mut prods = vec![Vec::with_capacity(n_paths as usize); probes.len()];
    let mut powers = vec![Vec::with_capacity(n_paths as usize); modes.len()];
    for p in 0..n_paths {
        let sheet = sample_sheet(&g, 2024, p).map_err(|e| e.to_string())?;
        for (k, &(t, x, s, y)) in probes.iter().enumerate() {
            let a = sheet.cumulate(t, x).map_err(|e| e.to_string())?;
            let b = sheet.cumulate(s, y).map_err(|e| e.to_string())?;
            prods[k].push(a * b);
        }
        let sn = sheet.to_spectral(&spec).map_err(|e| e.to_string())?;
        for (k, &j) in modes.iter().enumerate() {
            let slot = g.slot(j as i64);
            let v: f64 = (0..g.n_steps).map(|n| sn.row(n)[slot].norm_sqr()).sum::<f64>() / g.n_steps as f64;
            powers[k].push(v);
        }
    }
    let mut worst: f64 = 0.0;
    for (k, &(t, x, s, y)) in probes.iter().enumerate() {
        let (m, se) = mean_se(&prods[k]);
        let want = cov(t, x, s, y);
        let z = (m - want).abs() / se;
        worst = worst.max(z);
        check(z < 3.0, format!("probe {k}: {m:.4} vs {want} ({z:.2} se)"))?;
    }
    let want = 2.0 * g.half_width * g.dt();
    for (k, &j) in modes.iter().enumerate() {
        let (m, se) = mean_se(&powers[k]);
        let z = (m - want).abs() / se;
        worst = worst.max(z);
        check(z < 3.0, format!("mode {j}: {m:.4} vs {want} ({z:.2} se)"))?;
    }
    Ok(format!("6 covariance probes and 5 modes within {worst:.2} standard errors"))
}

fn linear_isometry() -> Outcome {
    let (alpha, delta, l) = (1.5, 0.3, 10.0);
    let g = GridSpec::new(l, 256, 1.0, 64);
    let model = LinearModel::new(FracParams::new(alpha, delta, 0), Coefficient::Const(1.0), Field::zeros(256))
        .map_err(|e| e.to_string())?;
    let spec = Spectral::new(&g).map_err(|e| e.to_string())?;
    let modes = [0i64, 1, 4, 16, 64];
    let mut samples = vec![Vec::new(); modes.len()];
    for p in 0..4000u64 {
        let sheet = sample_sheet(&g, 99, p).map_err(|e| e.to_string())?;
        let traj = evolve_linear(&model, &g, &sheet).map_err(|e| e.to_string())?;
        let last = &traj.spectral_states[g.n_steps];
        for (k, &j) in modes.iter().enumerate() {
            samples[k].push(last[g.slot(j)].norm_sqr());
        }
    }
    let _ = spec;
    let mut worst: f64 = 0.0;
    for (k, &j) in modes.iter().enumerate() {
        let a = psi(lambda_of(j, l), alpha, delta).0;
        let want = if a == 0.0 { 2.0 * l } else { 2.0 * l * (1.0 - (2.0 * a).exp()) / (-2.0 * a) };
        let (m, se) = mean_se(&samples[k]);
        let z = (m - want).abs() / se;
        worst = worst.max(z);
        check(z < 3.0, format!("mode {j}: {m:.4} vs {want:.4} ({z:.2} se)"))?;
    }
    Ok(format!("modes 0,1,4,16,64 within {worst:.2} standard errors"))
}

fn linear_vs_picard() -> Outcome {
    let g = GridSpec::new(10.0, 128, 1.0, 256);
    let p = FracParams::new(1.5, 0.3, 0);
    let u0 = bell(&g);
    let model = LinearModel::new(p.clone(), Coefficient::Const(1.0), u0.clone()).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dump = dir.path().join("noise.bin");
    sample_sheet(&g, 7, 0).and_then(|s| s.save(&dump)).map_err(|e| e.to_string())?;
    let sheet = SheetIncrements::load(&dump).map_err(|e| e.to_string())?;
    let lin = evolve_linear(&model, &g, &sheet).map_err(|e| e.to_string())?;
    let op = MildOperator::new(&p, &linear_coefficients(&model), &g).map_err(|e| e.to_string())?;
    let (path, diag) = op.picard_solve(&u0, &sheet, &PicardOptions::new(1e-12, 50)).map_err(|e| e.to_string())?;
    check(diag.converged, "picard did not converge")?;
    let dx = g.dx();
    let mut worst: f64 = 0.0;
    for n in 0..=g.n_steps {
        let d = lin.states[n].sub(&path.levels[n]).l2_norm(dx);
        let s = lin.states[n].l2_norm(dx);
        worst = worst.max(d / s);
    }
    check(worst < 1e-8, format!("rel L2 diff {worst:.2e}"))?;
    Ok(format!("rel L2 diff {worst:.1e} over {} output times", g.n_steps + 1))
}

fn picard_behavior() -> Outcome {
    let (p, c) = nonlinear_model();
    let base = GridSpec::new(8.0, 32, 0.5, 128);
    let tol = 1e-12;
    let sheet = sample_sheet(&base, 31, 0).map_err(|e| e.to_string())?;
    let u0 = bell(&base);
    let op = MildOperator::new(&p, &c, &base).map_err(|e| e.to_string())?;
    let (path, diag) = op.picard_solve(&u0, &sheet, &PicardOptions::new(tol, 60)).map_err(|e| e.to_string())?;
    check(diag.converged, "not converged")?;
    let d = &diag.distances;
    let mut worst_ratio: f64 = 0.0;
    for i in 1..d.len().saturating_sub(1) {
        worst_ratio = worst_ratio.max(d[i + 1] / d[i]);
    }
    check(worst_ratio < 0.8, format!("iterate ratio {worst_ratio:.3}"))?;
    let resid = op.fixed_point_residual(&u0, &path, &sheet).map_err(|e| e.to_string())?;
    check(resid < 1e-10, format!("fixed-point residual {resid:.2e}"))?;
    let (other, _) = op
        .picard_solve(&u0, &sheet, &PicardOptions::new(tol, 60).with_initial(InitialGuess::Zero))
        .map_err(|e| e.to_string())?;
    let guess = other.rel_l2_distance(&path);
    check(guess < 10.0 * tol, format!("initial guesses differ by {guess:.2e}"))?;

    // etd march vs Picard under dt refinement on one aggregated noise path
    let fine = GridSpec { n_steps: 1024, ..base };
    let fine_sheet = sample_sheet(&fine, 32, 0).map_err(|e| e.to_string())?;
    let mut diffs = Vec::new();
    for m in [128usize, 256, 512, 1024] {
        let g = GridSpec { n_steps: m, ..base };
        let s = fine_sheet.aggregate_to(&g).map_err(|e| e.to_string())?;
        let op = MildOperator::new(&p, &c, &g).map_err(|e| e.to_string())?;
        let (pic, _) = op.picard_solve(&u0, &s, &PicardOptions::new(tol, 60)).map_err(|e| e.to_string())?;
        let etd = op.etd_march(&u0, &s).map_err(|e| e.to_string())?;
        diffs.push(etd.max_l2_distance(&pic));
    }
    let pts: Vec<(f64, f64)> = diffs
        .iter()
        .enumerate()
        .map(|(i, d)| ((i as f64) * 2f64.ln(), d.ln()))
        .collect();
    let order = -slope(&pts);
    check(order >= 0.4, format!("etd order {order:.3} ({diffs:?})"))?;
    Ok(format!(
        "{} iterations, max ratio {worst_ratio:.3}, residual {resid:.1e}, guesses {guess:.1e}, etd order {order:.2}",
        diag.iterations
    ))
}

fn weak_equivalence() -> Outcome {
    let (p, c) = nonlinear_model();
    let coarse = GridSpec::new(8.0, 32, 0.5, 64);
    let levels = 3u32;
    let finest = coarse.refine(1 << (levels - 1), 1 << (levels - 1));
    let tol = 1e-11;
    let mut first = vec![0.0; levels as usize];
    let mut second = vec![0.0; levels as usize];
    let n_paths = 16;
    for path_id in 0..n_paths {
        let fine_sheet = sample_sheet(&finest, 77, path_id).map_err(|e| e.to_string())?;
        for l in 0..levels {
            let g = coarse.refine(1 << l, 1 << l);
            let s = fine_sheet.aggregate_to(&g).map_err(|e| e.to_string())?;
            let op = MildOperator::new(&p, &c, &g).map_err(|e| e.to_string())?;
            let (path, diag) = op.picard_solve(&bell(&g), &s, &PicardOptions::new(tol, 60)).map_err(|e| e.to_string())?;
            check(diag.converged, "picard did not converge")?;
            let battery = bump_battery(&g, &p).map_err(|e| e.to_string())?;
            let r1 = battery_residual_first(&path, &s, &battery, g.n_steps, &c, &p).map_err(|e| e.to_string())?;
            let r2 = battery_residual_second(&path, &s, &battery, g.n_steps, &c, &p).map_err(|e| e.to_string())?;
            let k = (n_paths * battery.len() as u64) as f64;
            first[l as usize] += r1.iter().sum::<f64>() / k;
            second[l as usize] += r2.iter().sum::<f64>() / k;
        }
    }
    let orders = |v: &[f64]| -> Vec<f64> { v.windows(2).map(|w| (w[0] / w[1]).log2()).collect() };
    let o1 = orders(&first);
    let o2 = orders(&second);
    for o in o1.iter().chain(&o2) {
        check(*o >= 0.5, format!("orders first {o1:.3?} second {o2:.3?}"))?;
    }

    // ∂_sψ^t = −D^α_{−δ}ψ^t against forward differences in s
    let consistency = |m: usize| -> f64 {
        let g = GridSpec { n_steps: m, ..coarse };
        let phi = make_bump(0.0, 2.0, &g, &p).unwrap();
        dual_test_function(&phi, m, &p, &g).unwrap().ds_consistency()
    };
    let errs: Vec<f64> = [256, 512, 1024].iter().map(|&m| consistency(m)).collect();
    let ds_orders = orders(&errs);
    for o in &ds_orders {
        check(*o >= 1.0 - 0.05, format!("ds identity orders {ds_orders:.3?}"))?;
    }
    Ok(format!(
        "first {} orders {o1:.2?}; second {} orders {o2:.2?}; ds orders {ds_orders:.2?}",
        sci(&first),
        sci(&second)
    ))
}

fn moment_bound() -> Outcome {
    let (p, c) = nonlinear_model();
    let mk = |n: usize, m: usize| {
        let mut cfg = RunConfig::new(p.clone(), GridSpec::new(8.0, n, 1.0, m));
        cfg.model = ModelKind::Nonlinear;
        cfg.f = c.f.clone();
        cfg.h = c.h.clone();
        cfg.u0 = InitialData::Gaussian { width: 1.0 };
        cfg
    };
    let fine_cfg = mk(512, 1024);
    let coarse_cfg = mk(256, 512);
    let n_paths = 100;
    let fine = run_mc_with(&fine_cfg, n_paths, 5, &McOptions::default()).map_err(|e| e.to_string())?;
    let coarse = run_mc_with(
        &coarse_cfg,
        n_paths,
        5,
        &McOptions {
            noise_grid: Some(fine_cfg.grid),
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    check(fine.excluded == 0 && coarse.excluded == 0, "paths excluded")?;
    check(fine.sup_m2.is_finite() && coarse.sup_m2.is_finite(), "sup not finite")?;
    let rel = ((fine.sup_m2 - coarse.sup_m2) / fine.sup_m2).abs();
    check(rel < 0.05, format!("sup E|u|^2: {:.4} vs {:.4}", coarse.sup_m2, fine.sup_m2))?;
    Ok(format!(
        "sup E|u|^2 = {:.4} (256/512) vs {:.4} (512/1024), rel diff {rel:.3}",
        coarse.sup_m2, fine.sup_m2
    ))
}

fn determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_fspde");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(
        &cfg_path,
        "alpha = 1.8\ndelta = 0.1\nm = 1\nL = 8\nN = 32\nT = 0.5\nM = 64\nf = sin\nh1 = linear:0.1\n\
         oracle = etd\nn_paths = 100\nlevels = 3\nseed = 12\n",
    )
    .map_err(|e| e.to_string())?;
    let mut compared = 0;
    for cmd in ["simulate-mild", "mc", "verify"] {
        let mut outputs = Vec::new();
        for (run, threads) in ["1", "3"].iter().enumerate() {
            let out = dir.path().join(format!("{cmd}-{run}"));
            let st = std::process::Command::new(exe)
                .args([cmd, "--config"])
                .arg(&cfg_path)
                .arg("--out")
                .arg(&out)
                .env("FSPDE_THREADS", threads)
                .stdout(std::process::Stdio::null())
                .status()
                .map_err(|e| e.to_string())?;
            check(st.success(), format!("{cmd} failed"))?;
            let mut files: Vec<_> = std::fs::read_dir(&out)
                .map_err(|e| e.to_string())?
                .map(|e| e.unwrap().path())
                .filter(|p| p.extension().is_some_and(|e| e == "csv"))
                .collect();
            files.sort();
            outputs.push(files.iter().map(|f| (f.file_name().unwrap().to_owned(), std::fs::read(f).unwrap())).collect::<Vec<_>>());
        }
        check(outputs[0] == outputs[1], format!("{cmd}: outputs differ"))?;
        compared += outputs[0].len();
    }

    let (p, c) = nonlinear_model();
    let mut cfg = RunConfig::new(p, GridSpec::new(8.0, 32, 0.5, 64));
    cfg.f = c.f;
    cfg.h = c.h;
    let one = run_mc_with(&cfg, 100, 3, &McOptions { threads: Some(1), ..Default::default() }).map_err(|e| e.to_string())?;
    let four = run_mc_with(&cfg, 100, 3, &McOptions { threads: Some(4), ..Default::default() }).map_err(|e| e.to_string())?;
    check(one == four, "MC estimates depend on worker count")?;
    Ok(format!("{compared} CSV files byte-identical across runs; MC identical on 1 and 4 workers"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("kernel oracles", kernel_oracles),
        ("kernel mass/semigroup/scaling/positivity", kernel_properties),
        ("tail asymptotics", tail_asymptotics),
        ("norm decay exponents", norm_exponents),
        ("noise law", noise_law),
        ("linear solver vs Ito isometry", linear_isometry),
        ("linear model: spectral vs Picard", linear_vs_picard),
        ("Picard behavior", picard_behavior),
        ("weak residuals under refinement", weak_equivalence),
        ("moment bound under grid doubling", moment_bound),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = format!("{}", i + 1);
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("acceptance {id:>2} PASS  {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("acceptance {id:>2} FAIL  {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
