//! Flat `key = value` run configuration.
//!
//! ```text
//! # comment
//! alpha = 1.8
//! delta = 0.1
//! m = 1
//! L = 8
//! N = 64
//! T = 0.5
//! M = 256
//! f = sin
//! h1 = linear:0.1
//! ```
//!
//! `alpha`, `delta`, `L`, `N`, `T` and `M` are required; everything else has
//! a default. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::config::{
    validate_with, Coefficient, CoefficientSpec, FracParams, GridSpec, ValidationMode, ValidationReport,
};
use crate::error::{FspdeError, Result};
use crate::frac::Field;
use crate::linear::LinearModel;
use crate::mild::PicardOptions;
use crate::weak::bump_value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// `f` independent of `u`, `h_k = c_k u`; solved mode by mode.
    Linear,
    /// General coefficients; solved by Picard iteration.
    Nonlinear,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Linear => "linear",
            ModelKind::Nonlinear => "nonlinear",
        })
    }
}

impl FromStr for ModelKind {
    type Err = FspdeError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(ModelKind::Linear),
            "nonlinear" => Ok(ModelKind::Nonlinear),
            _ => Err(FspdeError::Config(format!("model must be linear or nonlinear, got '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    Zero,
    /// `exp(−(x/width)²)`
    Gaussian { width: f64 },
    /// Smooth bump supported on `[center − width, center + width]`.
    Bump { center: f64, width: f64 },
}

impl InitialData {
    pub fn sample(&self, grid: &GridSpec) -> Field {
        match *self {
            InitialData::Zero => Field::zeros(grid.n_points),
            InitialData::Gaussian { width } => Field::from_fn(grid, |x| (-(x / width).powi(2)).exp()),
            InitialData::Bump { center, width } => Field::from_fn(grid, |x| bump_value(x, center, width)),
        }
    }
}

impl fmt::Display for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialData::Zero => write!(f, "zero"),
            InitialData::Gaussian { width } => write!(f, "gaussian:{width}"),
            InitialData::Bump { center, width } => write!(f, "bump:{center},{width}"),
        }
    }
}

impl FromStr for InitialData {
    type Err = FspdeError;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || FspdeError::Config(format!("bad u0 selector '{s}'"));
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<f64> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|a| a.trim().parse::<f64>().map_err(|_| bad()))
                .collect::<Result<_>>()?
        };
        match (name.trim(), nums.as_slice()) {
            ("zero", []) => Ok(InitialData::Zero),
            ("gaussian", []) => Ok(InitialData::Gaussian { width: 1.0 }),
            ("gaussian", [w]) => Ok(InitialData::Gaussian { width: *w }),
            ("bump", [c, w]) => Ok(InitialData::Bump { center: *c, width: *w }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Oracle {
    None,
    Etd,
}

/// Everything a CLI run needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: FracParams,
    pub grid: GridSpec,
    pub seed: u64,
    pub model: ModelKind,
    pub f: Coefficient,
    /// `h_0..h_m`
    pub h: Vec<Coefficient>,
    /// `None` means "derive from the built-in coefficients".
    pub lipschitz: Option<f64>,
    pub u0: InitialData,
    pub tol: f64,
    pub max_iter: usize,
    pub oracle: Oracle,
    pub n_paths: usize,
    pub levels: usize,
    pub kernel_t: f64,
    pub kernel_k: usize,
    pub tail_terms: usize,
    /// Times written to trajectory files; empty means five evenly spaced.
    pub out_times: Vec<f64>,
}

const KNOWN_KEYS: &[&str] = &[
    "alpha", "delta", "m", "L", "N", "T", "M", "seed", "model", "f", "lipschitz", "u0", "tol", "max_iter", "oracle",
    "n_paths", "levels", "kernel_t", "kernel_k", "tail_terms", "out_times",
];
const REQUIRED_KEYS: &[&str] = &["alpha", "delta", "L", "N", "T", "M"];

fn h_index(key: &str) -> Option<usize> {
    key.strip_prefix('h').and_then(|d| d.parse().ok())
}

fn lipschitz_of(c: &Coefficient) -> f64 {
    match c {
        Coefficient::Zero | Coefficient::Const(_) => 0.0,
        Coefficient::Affine { b, .. } => b.abs(),
        Coefficient::Linear(c) => c.abs(),
        Coefficient::Sin => 1.0,
        Coefficient::Custom(_) => f64::INFINITY,
    }
}

impl RunConfig {
    pub fn new(params: FracParams, grid: GridSpec) -> Self {
        Self {
            params,
            grid,
            seed: 0,
            model: ModelKind::Nonlinear,
            f: Coefficient::Zero,
            h: Vec::new(),
            lipschitz: None,
            u0: InitialData::Gaussian { width: 1.0 },
            tol: 1e-8,
            max_iter: 50,
            oracle: Oracle::None,
            n_paths: 100,
            levels: 3,
            kernel_t: 1.0,
            kernel_k: 0,
            tail_terms: 1,
            out_times: Vec::new(),
        }
    }

    pub fn coefficients(&self) -> CoefficientSpec {
        let lip = self.lipschitz.unwrap_or_else(|| {
            let f = lipschitz_of(&self.f);
            self.h.iter().map(lipschitz_of).fold(0.0, f64::max) + f
        });
        CoefficientSpec::new(self.f.clone(), self.h.clone(), lip)
    }

    pub fn picard_options(&self) -> PicardOptions {
        PicardOptions::new(self.tol, self.max_iter)
    }

    pub fn initial_field(&self) -> Field {
        self.u0.sample(&self.grid)
    }

    /// The linear model behind a `model = linear` config: every `h_k` must
    /// be `c_k·u` and `f` must ignore `u`.
    pub fn linear_model(&self) -> Result<LinearModel> {
        let drift = self
            .h
            .iter()
            .enumerate()
            .map(|(k, h)| {
                h.linear_factor()
                    .ok_or_else(|| FspdeError::Config(format!("linear model needs h{k} = linear:c, got {h}")))
            })
            .collect::<Result<Vec<_>>>()?;
        LinearModel::new(
            self.params.clone().with_drift(drift),
            self.f.clone(),
            self.initial_field(),
        )
    }

    pub fn validate(&self, mode: ValidationMode) -> ValidationReport {
        validate_with(mode, &self.params, &self.grid, &self.coefficients())
    }

    /// Output time levels, snapped to the grid.
    pub fn output_levels(&self) -> Result<Vec<usize>> {
        let g = &self.grid;
        if self.out_times.is_empty() {
            let mut v: Vec<usize> = (0..=4).map(|q| q * g.n_steps / 4).collect();
            v.dedup();
            return Ok(v);
        }
        self.out_times
            .iter()
            .map(|&t| {
                let nf = t / g.dt();
                let n = nf.round();
                if !(t >= 0.0) || (nf - n).abs() > 1e-9 * (1.0 + nf) || n as usize > g.n_steps {
                    return Err(FspdeError::Config(format!("out_times entry {t} is not a grid time")));
                }
                Ok(n as usize)
            })
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| FspdeError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if kv.insert(k.clone(), v).is_some() {
                return Err(FspdeError::Config(format!("duplicate key '{k}'")));
            }
        }
        let unknown: Vec<&str> = kv
            .keys()
            .map(String::as_str)
            .filter(|k| !KNOWN_KEYS.contains(k) && h_index(k).is_none())
            .collect();
        if !unknown.is_empty() {
            return Err(FspdeError::Config(format!("unknown keys: {}", unknown.join(", "))));
        }
        let missing: Vec<&str> = REQUIRED_KEYS.iter().copied().filter(|k| !kv.contains_key(*k)).collect();
        if !missing.is_empty() {
            return Err(FspdeError::Config(format!("missing required keys: {}", missing.join(", "))));
        }

        fn get<T: FromStr>(kv: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
            kv.get(key)
                .map(|v| {
                    v.parse::<T>()
                        .map_err(|_| FspdeError::Config(format!("cannot parse {key} = '{v}'")))
                })
                .transpose()
        }
        let req = |key: &str| -> Result<f64> { Ok(get::<f64>(&kv, key)?.expect("checked above")) };

        let m = get::<usize>(&kv, "m")?.unwrap_or(0);
        let params = FracParams::new(req("alpha")?, req("delta")?, m);
        let grid = GridSpec::new(
            req("L")?,
            get::<usize>(&kv, "N")?.expect("checked above"),
            req("T")?,
            get::<usize>(&kv, "M")?.expect("checked above"),
        );
        let mut cfg = RunConfig::new(params, grid);

        let mut h_keys: Vec<(usize, &String)> = kv.iter().filter_map(|(k, v)| h_index(k).map(|i| (i, v))).collect();
        h_keys.sort();
        if let Some(&(top, _)) = h_keys.last() {
            cfg.h = vec![Coefficient::Zero; top + 1];
            for (i, v) in h_keys {
                cfg.h[i] = v.parse()?;
            }
        }
        if let Some(v) = kv.get("f") {
            cfg.f = v.parse()?;
        }
        if let Some(v) = kv.get("model") {
            cfg.model = v.parse()?;
        }
        if let Some(v) = kv.get("u0") {
            cfg.u0 = v.parse()?;
        }
        if let Some(v) = kv.get("oracle") {
            cfg.oracle = match v.as_str() {
                "etd" => Oracle::Etd,
                "none" => Oracle::None,
                _ => return Err(FspdeError::Config(format!("oracle must be etd or none, got '{v}'"))),
            };
        }
        if let Some(v) = kv.get("out_times") {
            cfg.out_times = v
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| FspdeError::Config(format!("bad out_times entry '{s}'")))
                })
                .collect::<Result<_>>()?;
        }
        cfg.seed = get(&kv, "seed")?.unwrap_or(cfg.seed);
        cfg.lipschitz = get(&kv, "lipschitz")?;
        cfg.tol = get(&kv, "tol")?.unwrap_or(cfg.tol);
        cfg.max_iter = get(&kv, "max_iter")?.unwrap_or(cfg.max_iter);
        cfg.n_paths = get(&kv, "n_paths")?.unwrap_or(cfg.n_paths);
        cfg.levels = get(&kv, "levels")?.unwrap_or(cfg.levels);
        cfg.kernel_t = get(&kv, "kernel_t")?.unwrap_or(cfg.kernel_t);
        cfg.kernel_k = get(&kv, "kernel_k")?.unwrap_or(cfg.kernel_k);
        cfg.tail_terms = get(&kv, "tail_terms")?.unwrap_or(cfg.tail_terms);
        Ok(cfg)
    }

    /// Writes every key, so `parse(emit())` reproduces the config exactly.
    pub fn emit(&self) -> String {
        let p = &self.params;
        let g = &self.grid;
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        line("alpha", p.alpha.to_string());
        line("delta", p.delta.to_string());
        line("m", p.m.to_string());
        line("L", g.half_width.to_string());
        line("N", g.n_points.to_string());
        line("T", g.horizon.to_string());
        line("M", g.n_steps.to_string());
        line("seed", self.seed.to_string());
        line("model", self.model.to_string());
        line("f", self.f.to_string());
        for (k, h) in self.h.iter().enumerate() {
            line(&format!("h{k}"), h.to_string());
        }
        if let Some(l) = self.lipschitz {
            line("lipschitz", l.to_string());
        }
        line("u0", self.u0.to_string());
        line("tol", self.tol.to_string());
        line("max_iter", self.max_iter.to_string());
        line(
            "oracle",
            match self.oracle {
                Oracle::Etd => "etd",
                Oracle::None => "none",
            }
            .to_string(),
        );
        line("n_paths", self.n_paths.to_string());
        line("levels", self.levels.to_string());
        line("kernel_t", self.kernel_t.to_string());
        line("kernel_k", self.kernel_k.to_string());
        line("tail_terms", self.tail_terms.to_string());
        if !self.out_times.is_empty() {
            let t: Vec<String> = self.out_times.iter().map(f64::to_string).collect();
            line("out_times", t.join(","));
        }
        s
    }
}

/// Reads and parses a config file without validating it.
pub fn read_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    RunConfig::parse(&std::fs::read_to_string(path)?)
}

/// Reads a config and validates it for solver use.
pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    load_config_for(path, ValidationMode::Solver)
}

pub fn load_config_for(path: impl AsRef<Path>, mode: ValidationMode) -> Result<RunConfig> {
    let cfg = read_config(path)?;
    cfg.validate(mode).into_result()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "alpha = 1.5\ndelta = 0.2\nL = 8\nN = 32\nT = 1\nM = 16\n";

    #[test]
    fn minimal_config_defaults() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.tol, 1e-8);
        assert_eq!(c.max_iter, 50);
        assert_eq!(c.model, ModelKind::Nonlinear);
        assert!(c.validate(ValidationMode::Solver).ok);
        assert_eq!(c.output_levels().unwrap(), vec![0, 4, 8, 12, 16]);
    }

    #[test]
    fn round_trip() {
        let text = format!(
            "{MINIMAL}m = 1\nf = sin\nh1 = linear:0.1\nh0 = affine:0.25,-1.5\nu0 = bump:0.5,2\ntol = 1e-11\n\
             oracle = etd\nseed = 18446744073709551615\nout_times = 0.0625,1\nlipschitz = 2.5\n"
        );
        let a = RunConfig::parse(&text).unwrap();
        let b = RunConfig::parse(&a.emit()).unwrap();
        assert_eq!(a.emit(), b.emit());
        assert_eq!(b.params, a.params);
        assert_eq!(b.grid, a.grid);
        assert_eq!(b.seed, u64::MAX);
        assert_eq!(b.tol, 1e-11);
        assert_eq!(b.u0, InitialData::Bump { center: 0.5, width: 2.0 });
        assert_eq!(b.out_times, vec![0.0625, 1.0]);
        assert_eq!(b.output_levels().unwrap(), vec![1, 16]);
    }

    #[test]
    fn unknown_and_missing_keys() {
        let err = RunConfig::parse(&format!("{MINIMAL}colour = red\nspeed = 3\n")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("colour") && msg.contains("speed"), "{msg}");
        let err = RunConfig::parse("alpha = 1.5\nN = 32\n").unwrap_err().to_string();
        assert!(err.contains("delta") && err.contains("M"), "{err}");
        assert!(RunConfig::parse(&format!("{MINIMAL}alpha = 1.6\n")).is_err());
    }

    #[test]
    fn low_alpha_rejected_with_rule() {
        let c = RunConfig::parse(&MINIMAL.replace("alpha = 1.5", "alpha = 0.9").replace("delta = 0.2", "delta = 0")).unwrap();
        let rep = c.validate(ValidationMode::Solver);
        assert!(rep.has_rule("alpha-range"));
    }

    #[test]
    fn linear_model_extraction() {
        let c = RunConfig::parse(&format!("{MINIMAL}m = 1\nmodel = linear\nf = const:1\nh0 = linear:-0.5\n")).unwrap();
        let lm = c.linear_model().unwrap();
        assert_eq!(lm.params.drift, vec![-0.5]);
        let c = RunConfig::parse(&format!("{MINIMAL}model = linear\nh0 = sin\n")).unwrap();
        assert!(c.linear_model().is_err());
    }
}
