//! Problem description: operator data, grid, coefficients, and the checks
//! that tie them to the admissibility conditions of the model.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{domain, FspdeError, Result};

const INT_TOL: f64 = 1e-12;

/// Largest even integer strictly less than `alpha`.
pub fn even_part(alpha: f64) -> Result<u32> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return domain(format!("even_part requires alpha > 0, got {alpha}"));
    }
    let mut e = 2.0 * (alpha / 2.0).floor();
    if e >= alpha {
        e -= 2.0;
    }
    Ok(e.max(0.0) as u32)
}

/// Admissible skewness half-width `min{α − [α]₂, 2 + [α]₂ − α}`.
pub fn delta_bound(alpha: f64) -> Result<f64> {
    let e = f64::from(even_part(alpha)?);
    Ok((alpha - e).min(2.0 + e - alpha))
}

pub(crate) fn is_integer(x: f64) -> bool {
    (x - x.round()).abs() < INT_TOL
}

fn is_odd_integer(x: f64) -> bool {
    is_integer(x) && (x.round() as i64).rem_euclid(2) == 1
}

/// Operator data: order `alpha`, skewness `delta`, highest entire derivative
/// order `m`, and the drift coefficients `c_0..c_m` of the linear model.
#[derive(Debug, Clone, PartialEq)]
pub struct FracParams {
    pub alpha: f64,
    pub delta: f64,
    pub m: usize,
    pub drift: Vec<f64>,
}

impl FracParams {
    pub fn new(alpha: f64, delta: f64, m: usize) -> Self {
        Self {
            alpha,
            delta,
            m,
            drift: Vec::new(),
        }
    }

    pub fn with_drift(mut self, drift: Vec<f64>) -> Self {
        self.drift = drift;
        self
    }

    /// Same operator with the skewness flipped; this is the symbol of the
    /// adjoint operator.
    pub fn dual(&self) -> Self {
        Self {
            delta: -self.delta,
            ..self.clone()
        }
    }

    /// Checks that `(alpha, delta)` define a fractional derivative at all.
    pub fn check_operator(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return domain(format!("alpha must be positive, got {}", self.alpha));
        }
        let bound = delta_bound(self.alpha)?;
        if self.delta.abs() > bound + INT_TOL {
            return domain(format!(
                "|delta| = {} exceeds bound {bound} for alpha = {}",
                self.delta.abs(),
                self.alpha
            ));
        }
        if is_odd_integer(self.alpha) && self.delta != 0.0 {
            return domain(format!(
                "delta must vanish for odd integer alpha = {}",
                self.alpha
            ));
        }
        Ok(())
    }
}

/// Periodic space-time grid on `[-L, L) × [0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Half-width `L` of the periodic domain.
    pub half_width: f64,
    /// Number of spatial nodes `N`.
    pub n_points: usize,
    /// Horizon `T`.
    pub horizon: f64,
    /// Number of time steps `M`.
    pub n_steps: usize,
}

impl GridSpec {
    pub fn new(half_width: f64, n_points: usize, horizon: f64, n_steps: usize) -> Self {
        Self {
            half_width,
            n_points,
            horizon,
            n_steps,
        }
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.n_points as f64
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    /// Node `x_i = -L + i·dx`, computed so that `x_{N/2}` is exactly zero.
    pub fn x(&self, i: usize) -> f64 {
        let n = self.n_points as f64;
        self.half_width * (2.0 * i as f64 - n) / n
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    pub fn time(&self, n: usize) -> f64 {
        self.horizon * n as f64 / self.n_steps as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|n| self.time(n)).collect()
    }

    /// Index of the node sitting at `x = 0`.
    pub fn origin_index(&self) -> usize {
        self.n_points / 2
    }

    /// Signed frequency index of FFT slot `k`: `j ∈ {-N/2, …, N/2 - 1}`.
    pub fn freq_index(&self, k: usize) -> i64 {
        let n = self.n_points as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    /// FFT slot holding signed frequency `j`.
    pub fn slot(&self, j: i64) -> usize {
        j.rem_euclid(self.n_points as i64) as usize
    }

    /// Angular frequency `λ = π j / L` of FFT slot `k`.
    pub fn lambda(&self, k: usize) -> f64 {
        std::f64::consts::PI * self.freq_index(k) as f64 / self.half_width
    }

    pub fn nyquist_slot(&self) -> usize {
        self.n_points / 2
    }

    /// `space`× more nodes and `time`× more steps on the same domain.
    pub fn refine(&self, space: usize, time: usize) -> Self {
        Self {
            n_points: self.n_points * space,
            n_steps: self.n_steps * time,
            ..*self
        }
    }

    pub fn check(&self) -> Result<()> {
        let rep = grid_violations(self);
        match rep.first() {
            None => Ok(()),
            Some((_, msg)) => domain(msg.clone()),
        }
    }
}

pub type CoefficientFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
pub type Envelope = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A coefficient `(t, x, u) ↦ value`, either from the built-in library or a
/// user closure.
#[derive(Clone)]
pub enum Coefficient {
    Zero,
    Const(f64),
    /// `a + b·u`
    Affine { a: f64, b: f64 },
    /// `c·u`
    Linear(f64),
    /// `sin(u)`
    Sin,
    Custom(CoefficientFn),
}

impl Coefficient {
    #[inline]
    pub fn eval(&self, t: f64, x: f64, u: f64) -> f64 {
        match self {
            Coefficient::Zero => 0.0,
            Coefficient::Const(c) => *c,
            Coefficient::Affine { a, b } => a + b * u,
            Coefficient::Linear(c) => c * u,
            Coefficient::Sin => u.sin(),
            Coefficient::Custom(g) => g(t, x, u),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coefficient::Zero => true,
            Coefficient::Const(c) | Coefficient::Linear(c) => *c == 0.0,
            Coefficient::Affine { a, b } => *a == 0.0 && *b == 0.0,
            _ => false,
        }
    }

    /// `Some(false)` when the coefficient provably ignores `u`; custom
    /// closures report `None`.
    pub fn depends_on_u(&self) -> Option<bool> {
        match self {
            Coefficient::Zero | Coefficient::Const(_) => Some(false),
            Coefficient::Affine { b, .. } => Some(*b != 0.0),
            Coefficient::Linear(c) => Some(*c != 0.0),
            Coefficient::Sin => Some(true),
            Coefficient::Custom(_) => None,
        }
    }

    /// The constant `c` when the coefficient is exactly `c·u`.
    pub fn linear_factor(&self) -> Option<f64> {
        match self {
            Coefficient::Zero => Some(0.0),
            Coefficient::Linear(c) => Some(*c),
            Coefficient::Affine { a, b } if *a == 0.0 => Some(*b),
            _ => None,
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Zero => write!(f, "zero"),
            Coefficient::Const(c) => write!(f, "const:{c}"),
            Coefficient::Affine { a, b } => write!(f, "affine:{a},{b}"),
            Coefficient::Linear(c) => write!(f, "linear:{c}"),
            Coefficient::Sin => write!(f, "sin"),
            Coefficient::Custom(_) => write!(f, "custom"),
        }
    }
}

impl FromStr for Coefficient {
    type Err = FspdeError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a)),
            None => (s, None),
        };
        let num = |v: &str| -> Result<f64> {
            v.trim()
                .parse::<f64>()
                .map_err(|_| FspdeError::Config(format!("bad number '{v}' in coefficient '{s}'")))
        };
        match (name, args) {
            ("zero", None) => Ok(Coefficient::Zero),
            ("sin", None) => Ok(Coefficient::Sin),
            ("const", Some(a)) => Ok(Coefficient::Const(num(a)?)),
            ("linear", Some(a)) => Ok(Coefficient::Linear(num(a)?)),
            ("affine", Some(a)) => {
                let (x, y) = a.split_once(',').ok_or_else(|| {
                    FspdeError::Config(format!("affine coefficient needs 'a,b', got '{s}'"))
                })?;
                Ok(Coefficient::Affine {
                    a: num(x)?,
                    b: num(y)?,
                })
            }
            _ => Err(FspdeError::Config(format!("unknown coefficient selector '{s}'"))),
        }
    }
}

/// Diffusion coefficient `f`, drift terms `h_0..h_m`, and the declared
/// Lipschitz/growth data.
#[derive(Clone, Debug)]
pub struct CoefficientSpec {
    pub f: Coefficient,
    pub h: Vec<Coefficient>,
    /// Growth envelopes `a_0..a_{m+1}`; empty means "not declared".
    pub envelopes: Vec<EnvelopeFn>,
    /// Declared Lipschitz constant `K_T`.
    pub lipschitz: f64,
}

#[derive(Clone)]
pub struct EnvelopeFn(pub Envelope);

impl fmt::Debug for EnvelopeFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EnvelopeFn")
    }
}

impl CoefficientSpec {
    pub fn new(f: Coefficient, h: Vec<Coefficient>, lipschitz: f64) -> Self {
        Self {
            f,
            h,
            envelopes: Vec::new(),
            lipschitz,
        }
    }

    /// No forcing and no noise.
    pub fn zero() -> Self {
        Self::new(Coefficient::Zero, Vec::new(), 0.0)
    }

    pub fn with_envelopes(mut self, envelopes: Vec<Envelope>) -> Self {
        self.envelopes = envelopes.into_iter().map(EnvelopeFn).collect();
        self
    }

    /// `h_k`, with missing entries treated as zero.
    pub fn h(&self, k: usize) -> &Coefficient {
        self.h.get(k).unwrap_or(&Coefficient::Zero)
    }

    /// Highest `k` with a non-zero `h_k`.
    pub fn max_active_order(&self) -> Option<usize> {
        self.h.iter().rposition(|c| !c.is_zero())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<(String, String)>,
}

impl ValidationReport {
    fn from_violations(violations: Vec<(String, String)>) -> Self {
        Self {
            ok: violations.is_empty(),
            violations,
        }
    }

    pub fn has_rule(&self, rule: &str) -> bool {
        self.violations.iter().any(|(r, _)| r == rule)
    }

    pub fn into_result(self) -> Result<()> {
        if self.ok {
            Ok(())
        } else {
            Err(FspdeError::Validation(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok {
            return write!(f, "ok");
        }
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|(r, m)| format!("[{r}] {m}"))
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Which use the parameters are validated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationMode {
    /// Solvers: `alpha > 1`, non-integer.
    Solver,
    /// Kernel evaluation: additionally admits the closed-form cases `alpha ∈ {1, 2}`.
    KernelOracle,
}

/// Validates for solver use.
pub fn validate(params: &FracParams, grid: &GridSpec, coeffs: &CoefficientSpec) -> ValidationReport {
    validate_with(ValidationMode::Solver, params, grid, coeffs)
}

pub fn validate_with(
    mode: ValidationMode,
    params: &FracParams,
    grid: &GridSpec,
    coeffs: &CoefficientSpec,
) -> ValidationReport {
    let mut v: Vec<(String, String)> = Vec::new();
    let mut push = |rule: &str, msg: String| v.push((rule.to_string(), msg));
    let alpha = params.alpha;

    if !(alpha > 0.0) || !alpha.is_finite() {
        push("alpha-positive", format!("alpha must be positive, got {alpha}"));
    } else {
        let integer = is_integer(alpha);
        let range_ok = match mode {
            ValidationMode::Solver => alpha > 1.0 && !integer,
            ValidationMode::KernelOracle => {
                (alpha > 1.0 && !integer) || (alpha - 1.0).abs() < INT_TOL || (alpha - 2.0).abs() < INT_TOL
            }
        };
        if !range_ok {
            let what = match mode {
                ValidationMode::Solver => "alpha must be > 1 and non-integer for the solvers",
                ValidationMode::KernelOracle => {
                    "alpha must be > 1 and non-integer, or exactly 1 or 2 for kernel oracles"
                }
            };
            push("alpha-range", format!("{what}, got {alpha}"));
        }
        if let Ok(bound) = delta_bound(alpha) {
            if params.delta.abs() > bound + INT_TOL {
                push("delta-bound", format!("delta exceeds bound {bound}"));
            }
        }
        if is_odd_integer(alpha) && params.delta != 0.0 {
            push("delta-odd", format!("delta must be 0 for odd integer alpha {alpha}"));
        }
        let floor = alpha.floor() as usize;
        if params.m > floor {
            push(
                "m-range",
                format!("m > floor(alpha): m = {}, floor(alpha) = {floor}", params.m),
            );
        }
    }

    let needs_derivatives = coeffs.max_active_order().is_some_and(|k| k >= 1)
        || params.drift.iter().skip(1).any(|c| *c != 0.0);
    if needs_derivatives && params.m == 0 {
        push(
            "m-range",
            "derivative terms present but m = 0; need 1 <= m <= floor(alpha)".to_string(),
        );
    }
    if coeffs.h.len() > params.m + 1 {
        push(
            "h-len",
            format!("{} drift coefficients h_k given but m = {}", coeffs.h.len(), params.m),
        );
    }
    if params.drift.len() > params.m + 1 {
        push(
            "drift-len",
            format!("{} drift constants c_k given but m = {}", params.drift.len(), params.m),
        );
    }

    for (rule, msg) in grid_violations(grid) {
        push(&rule, msg);
    }
    if grid_violations(grid).is_empty() {
        for (rule, msg) in coefficient_violations(params, grid, coeffs) {
            push(&rule, msg);
        }
    }

    ValidationReport::from_violations(v)
}

fn grid_violations(grid: &GridSpec) -> Vec<(String, String)> {
    let mut v = Vec::new();
    if !(grid.half_width > 0.0) || !grid.half_width.is_finite() {
        v.push(("grid-L".into(), format!("L must be positive, got {}", grid.half_width)));
    }
    if grid.n_points < 4 || !grid.n_points.is_power_of_two() {
        v.push((
            "grid-N".into(),
            format!("N must be a power of two >= 4, got {}", grid.n_points),
        ));
    }
    if !(grid.horizon > 0.0) || !grid.horizon.is_finite() {
        v.push(("grid-T".into(), format!("T must be positive, got {}", grid.horizon)));
    }
    if grid.n_steps == 0 {
        v.push(("grid-M".into(), "M must be positive".into()));
    }
    v
}

const PROBE_PAIRS: [(f64, f64); 6] = [
    (-2.0, -1.5),
    (-0.3, 0.4),
    (0.0, 1e-3),
    (1.0, 2.5),
    (3.0, -3.0),
    (0.7, 0.71),
];

fn coefficient_violations(
    params: &FracParams,
    grid: &GridSpec,
    coeffs: &CoefficientSpec,
) -> Vec<(String, String)> {
    let mut v = Vec::new();
    let k_t = coeffs.lipschitz;
    let probe_t = [0.0, 0.5 * grid.horizon, grid.horizon];
    let probe_x = [-0.5 * grid.half_width, 0.0, grid.half_width / 3.0];
    let n_h = params.m + 1;

    let mut worst: f64 = 0.0;
    for &t in &probe_t {
        for &x in &probe_x {
            for &(y, z) in &PROBE_PAIRS {
                let df = (coeffs.f.eval(t, x, y) - coeffs.f.eval(t, x, z)).abs();
                for k in 0..n_h {
                    let h = coeffs.h(k);
                    let dh = (h.eval(t, x, y) - h.eval(t, x, z)).abs();
                    worst = worst.max((dh + df) / (y - z).abs());
                }
            }
        }
    }
    if worst > 1.05 * k_t {
        v.push((
            "lipschitz".into(),
            format!("sampled Lipschitz ratio {worst} exceeds 1.05 * K_T = {}", 1.05 * k_t),
        ));
    }

    if !coeffs.envelopes.is_empty() {
        if coeffs.envelopes.len() != params.m + 2 {
            v.push((
                "growth".into(),
                format!(
                    "expected {} growth envelopes a_0..a_(m+1), got {}",
                    params.m + 2,
                    coeffs.envelopes.len()
                ),
            ));
        } else {
            let probe_u = [-3.0, -0.5, 0.0, 0.5, 3.0];
            'outer: for &t in &probe_t {
                for &x in &probe_x {
                    for &u in &probe_u {
                        for k in 0..=n_h {
                            let (val, env) = if k < n_h {
                                (coeffs.h(k).eval(t, x, u), &coeffs.envelopes[k])
                            } else {
                                (coeffs.f.eval(t, x, u), &coeffs.envelopes[n_h])
                            };
                            let cap = 1.05 * k_t * ((env.0)(x) + u.abs());
                            if val.abs() > cap {
                                let which = if k < n_h {
                                    format!("h_{k}")
                                } else {
                                    "f".to_string()
                                };
                                v.push((
                                    "growth".into(),
                                    format!("|{which}({t}, {x}, {u})| = {} exceeds growth bound {cap}", val.abs()),
                                ));
                                break 'outer;
                            }
                        }
                    }
                }
            }
        }
    }
    v
}
