//! Two-sided space-time white noise on the grid.
//!
//! Cell `i` covers `[x_i, x_i + dx)` and time level `n` covers
//! `[t_n, t_{n+1})`; each increment is `N(0, dt·dx)`. Because the grid has a
//! node at `x = 0`, cells lie strictly on one side of the origin, and the two
//! sides are drawn from disjoint generator substreams. That gives the
//! covariance `¼(sgn x + sgn y)² (t∧s)(|x|∧|y|)` of `W` on grid points.
//!
//! Each `(seed, stream, level, side)` has its own ChaCha key/stream, so any
//! subset of paths or levels can be generated in any order with identical
//! results.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::config::GridSpec;
use crate::error::{domain, FspdeError, Result};
use crate::frac::Spectral;

const DUMP_MAGIC: &[u8; 8] = b"FSPDENS1";
const GRID_TOL: f64 = 1e-9;

/// Cellwise increments `dW[n][i]`, row-major `M × N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SheetIncrements {
    pub grid: GridSpec,
    pub seed: u64,
    pub stream: u64,
    dw: Vec<f64>,
}

/// Per-mode increments `dEta[n][j] = Σ_i e^{iλ_j y_i} dW[n][i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralNoise {
    pub grid: GridSpec,
    rows: Vec<Vec<Complex64>>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn side_rng(seed: u64, stream: u64, side: u64, level: usize) -> ChaCha8Rng {
    let key = splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ side);
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(level as u64);
    rng
}

/// Samples the increments of one noise path.
pub fn sample_sheet(grid: &GridSpec, seed: u64, stream: u64) -> Result<SheetIncrements> {
    grid.check()?;
    let n = grid.n_points;
    let origin = grid.origin_index();
    let sd = (grid.dt() * grid.dx()).sqrt();
    let mut dw = vec![0.0; grid.n_steps * n];
    dw.par_chunks_mut(n).enumerate().for_each(|(level, row)| {
        let (left, right) = row.split_at_mut(origin);
        let mut rng = side_rng(seed, stream, 0, level);
        // left cells are filled outward from the origin
        for v in left.iter_mut().rev() {
            *v = sd * rng.sample::<f64, _>(StandardNormal);
        }
        let mut rng = side_rng(seed, stream, 1, level);
        for v in right.iter_mut() {
            *v = sd * rng.sample::<f64, _>(StandardNormal);
        }
    });
    Ok(SheetIncrements {
        grid: *grid,
        seed,
        stream,
        dw,
    })
}

impl SheetIncrements {
    pub fn zeros(grid: &GridSpec) -> Self {
        Self {
            grid: *grid,
            seed: 0,
            stream: 0,
            dw: vec![0.0; grid.n_steps * grid.n_points],
        }
    }

    pub fn from_raw(grid: &GridSpec, seed: u64, stream: u64, dw: Vec<f64>) -> Result<Self> {
        let want = grid.n_steps * grid.n_points;
        if dw.len() != want {
            return Err(FspdeError::Shape {
                expected: want,
                got: dw.len(),
            });
        }
        Ok(Self {
            grid: *grid,
            seed,
            stream,
            dw,
        })
    }

    pub fn row(&self, n: usize) -> &[f64] {
        let w = self.grid.n_points;
        &self.dw[n * w..(n + 1) * w]
    }

    pub fn get(&self, n: usize, i: usize) -> f64 {
        self.dw[n * self.grid.n_points + i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.dw
    }

    pub fn scaled(&self, eps: f64) -> Self {
        Self {
            dw: self.dw.iter().map(|v| v * eps).collect(),
            ..self.clone()
        }
    }

    /// Coarse-grid increments obtained by summing blocks of
    /// `time_factor × space_factor` fine increments.
    pub fn aggregate(&self, space_factor: usize, time_factor: usize) -> Result<Self> {
        let g = &self.grid;
        if space_factor == 0
            || time_factor == 0
            || g.n_points % space_factor != 0
            || g.n_steps % time_factor != 0
        {
            return domain(format!(
                "cannot aggregate {}x{} sheet by factors ({time_factor}, {space_factor})",
                g.n_steps, g.n_points
            ));
        }
        let coarse = GridSpec {
            n_points: g.n_points / space_factor,
            n_steps: g.n_steps / time_factor,
            ..*g
        };
        coarse.check()?;
        let mut dw = vec![0.0; coarse.n_steps * coarse.n_points];
        for (n, out) in dw.chunks_mut(coarse.n_points).enumerate() {
            for a in 0..time_factor {
                let fine = self.row(n * time_factor + a);
                for (i, v) in out.iter_mut().enumerate() {
                    *v += fine[i * space_factor..(i + 1) * space_factor].iter().sum::<f64>();
                }
            }
        }
        Ok(Self {
            grid: coarse,
            seed: self.seed,
            stream: self.stream,
            dw,
        })
    }

    /// Aggregates down to `target`, which must nest inside this grid.
    pub fn aggregate_to(&self, target: &GridSpec) -> Result<Self> {
        let g = &self.grid;
        if (target.half_width - g.half_width).abs() > GRID_TOL * g.half_width
            || (target.horizon - g.horizon).abs() > GRID_TOL * g.horizon
            || target.n_points == 0
            || target.n_steps == 0
            || g.n_points % target.n_points != 0
            || g.n_steps % target.n_steps != 0
        {
            return domain("target grid is not nested in the sheet grid");
        }
        self.aggregate(g.n_points / target.n_points, g.n_steps / target.n_steps)
    }

    /// `W(t, x)`: sum of increments over `[0, t] × [0, x]` (or `[x, 0]` for
    /// negative `x`). Both arguments must be grid points.
    pub fn cumulate(&self, t: f64, x: f64) -> Result<f64> {
        let g = &self.grid;
        let nf = t / g.dt();
        let n = nf.round();
        if !(t >= 0.0) || (nf - n).abs() > GRID_TOL * (1.0 + nf) || n as usize > g.n_steps {
            return domain(format!("t = {t} is not a grid time"));
        }
        let xf = (x + g.half_width) / g.dx();
        let xi = xf.round();
        if (xf - xi).abs() > GRID_TOL * (1.0 + xf.abs()) || xi < 0.0 || xi as usize > g.n_points {
            return domain(format!("x = {x} is not a grid node"));
        }
        let (n, xi) = (n as usize, xi as usize);
        let origin = g.origin_index();
        let cells = if xi >= origin { origin..xi } else { xi..origin };
        Ok((0..n)
            .map(|level| self.row(level)[cells.clone()].iter().sum::<f64>())
            .sum())
    }

    pub fn to_spectral(&self, spec: &Spectral) -> Result<SpectralNoise> {
        if spec.grid() != &self.grid {
            return domain("spectral grid differs from sheet grid");
        }
        let rows = (0..self.grid.n_steps)
            .into_par_iter()
            .map(|n| spec.sum_transform(self.row(n)))
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectralNoise {
            grid: self.grid,
            rows,
        })
    }

    pub fn write_dump(&self, mut w: impl Write) -> Result<()> {
        let g = &self.grid;
        let mut buf = Vec::with_capacity(56 + 8 * self.dw.len());
        buf.extend_from_slice(DUMP_MAGIC);
        buf.extend_from_slice(&g.half_width.to_le_bytes());
        buf.extend_from_slice(&(g.n_points as u64).to_le_bytes());
        buf.extend_from_slice(&g.horizon.to_le_bytes());
        buf.extend_from_slice(&(g.n_steps as u64).to_le_bytes());
        buf.extend_from_slice(&self.seed.to_le_bytes());
        buf.extend_from_slice(&self.stream.to_le_bytes());
        for v in &self.dw {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_dump(mut r: impl Read) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() < 56 || &bytes[..8] != DUMP_MAGIC {
            return Err(FspdeError::Config("not a noise dump".into()));
        }
        let word = |i: usize| -> [u8; 8] { bytes[8 + 8 * i..16 + 8 * i].try_into().unwrap() };
        let grid = GridSpec::new(
            f64::from_le_bytes(word(0)),
            u64::from_le_bytes(word(1)) as usize,
            f64::from_le_bytes(word(2)),
            u64::from_le_bytes(word(3)) as usize,
        );
        grid.check()?;
        let seed = u64::from_le_bytes(word(4));
        let stream = u64::from_le_bytes(word(5));
        let body = &bytes[56..];
        let want = grid.n_points * grid.n_steps;
        if body.len() != 8 * want {
            return Err(FspdeError::Shape {
                expected: want,
                got: body.len() / 8,
            });
        }
        let dw = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::from_raw(&grid, seed, stream, dw)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_dump(std::io::BufWriter::new(f))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_dump(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

impl SpectralNoise {
    pub fn row(&self, n: usize) -> &[Complex64] {
        &self.rows[n]
    }

    /// `η_j(t_n) = Σ_{l<n} dEta[l][j]`
    pub fn martingale(&self, slot: usize) -> Vec<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut out = Vec::with_capacity(self.rows.len() + 1);
        out.push(acc);
        for r in &self.rows {
            acc += r[slot];
            out.push(acc);
        }
        out
    }
}

/// `Σ_i e^{iλ_j y_i} weight_i dW_i` for one time level.
pub fn weighted_increment(spec: &Spectral, dw: &[f64], weight: &[f64]) -> Result<Vec<Complex64>> {
    let v: Vec<f64> = dw.iter().zip(weight).map(|(a, b)| a * b).collect();
    spec.sum_transform(&v)
}
