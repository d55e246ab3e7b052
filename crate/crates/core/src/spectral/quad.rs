//! Midpoint-rule quadrature on dyadic tensor grids, with Richardson refinement.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbol::SymbolSpec;

/// Quadrature settings shared by every spectral computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadParams {
    /// Per-entry stopping tolerance; `None` picks the default for the dimension.
    pub tol: Option<f64>,
    /// Finest grid is `2^max_level` points per axis; `None` picks a default.
    pub max_level: Option<u32>,
    /// Sample count for Monte Carlo integration in dimension three and up.
    pub mc_points: usize,
    pub seed: u64,
    /// Use closed forms where available. Turning this off forces quadrature.
    pub closed_form: bool,
}

impl Default for QuadParams {
    fn default() -> Self {
        QuadParams {
            tol: None,
            max_level: None,
            mc_points: 10_000_000,
            seed: 0,
            closed_form: true,
        }
    }
}

impl QuadParams {
    pub fn forced() -> Self {
        QuadParams {
            closed_form: false,
            ..Self::default()
        }
    }

    pub fn tol_for(&self, dim: usize) -> f64 {
        self.tol.unwrap_or(if dim == 1 { 1e-10 } else { 1e-8 })
    }

    pub fn max_level_for(&self, dim: usize) -> u32 {
        self.max_level.unwrap_or(match dim {
            1 => 20,
            _ => 12,
        })
    }

    /// Short description used in cache keys.
    pub fn key(&self, dim: usize) -> String {
        format!(
            "tol={:e};max={};mc={};seed={};closed={}",
            self.tol_for(dim),
            self.max_level_for(dim),
            self.mc_points,
            self.seed,
            self.closed_form
        )
    }
}

const CHUNK: usize = 1 << 14;

/// Values of `g(f(x))` on the midpoint grid with `n` points per axis,
/// row-major with the first axis slowest.
pub(crate) fn grid_values<G>(spec: &SymbolSpec, n: usize, g: G) -> Result<Vec<f64>>
where
    G: Fn(f64) -> f64 + Sync,
{
    let d = spec.dim;
    let total = n.pow(d as u32);
    let h = 1.0 / n as f64;
    let mut out = vec![0.0; total];
    out.par_chunks_mut(CHUNK)
        .enumerate()
        .try_for_each(|(c, chunk)| -> Result<()> {
            let mut x = vec![0.0; d];
            for (o, slot) in chunk.iter_mut().enumerate() {
                let mut idx = c * CHUNK + o;
                for j in (0..d).rev() {
                    x[j] = ((idx % n) as f64 + 0.5) * h;
                    idx /= n;
                }
                *slot = g(spec.eval_reduced(&x)?);
            }
            Ok(())
        })?;
    Ok(out)
}

/// Deterministic chunked sum of a grid (independent of thread count).
pub(crate) fn grid_sum(values: &[f64]) -> f64 {
    let partial: Vec<f64> = values.par_chunks(CHUNK).map(|c| c.iter().sum::<f64>()).collect();
    pairwise(&partial)
}

fn pairwise(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => pairwise(&v[..n / 2]) + pairwise(&v[n / 2..]),
    }
}

/// Midpoint-rule Fourier coefficients for `|k_j| <= kmax` from grid values.
///
/// Returns the entries in the same lexicographic layout as
/// [`super::CoeffTable`].
pub(crate) fn grid_coeffs(values: &[f64], n: usize, dim: usize, kmax: &[i64]) -> Vec<Complex64> {
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    // transform along each axis in turn
    let total = data.len();
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for start in 0..total {
            // first element of each line: index whose axis-coordinate is zero
            if !(start / stride).is_multiple_of(n) {
                continue;
            }
            for (i, slot) in line.iter_mut().enumerate() {
                *slot = data[start + i * stride];
            }
            fft.process(&mut line);
            for (i, v) in line.iter().enumerate() {
                data[start + i * stride] = *v;
            }
        }
    }
    let scale = 1.0 / total as f64;
    let len: usize = kmax.iter().map(|k| (2 * k + 1) as usize).product();
    let mut out = Vec::with_capacity(len);
    let mut k = vec![0i64; dim];
    for idx in 0..len {
        let mut rem = idx;
        for j in (0..dim).rev() {
            let w = (2 * kmax[j] + 1) as usize;
            k[j] = (rem % w) as i64 - kmax[j];
            rem /= w;
        }
        let mut flat = 0usize;
        let mut phase = 0.0;
        for &kj in &k {
            flat = flat * n + kj.rem_euclid(n as i64) as usize;
            phase += kj as f64;
        }
        // midpoint nodes sit at (j + 1/2)/n
        let rot = Complex64::from_polar(1.0, -std::f64::consts::PI * phase / n as f64);
        out.push(data[flat] * rot * scale);
    }
    out
}

/// Richardson tableau over successive halvings of the step, eliminating
/// error terms `h, h^2, h^3, ...` in turn.
#[derive(Debug, Clone, Default)]
pub(crate) struct Tableau {
    rows: Vec<Vec<Vec<Complex64>>>,
    raw: Vec<Vec<Complex64>>,
}

const MAX_COLUMNS: usize = 10;

impl Tableau {
    pub fn push(&mut self, estimate: Vec<Complex64>) {
        self.raw.push(estimate.clone());
        let mut row = vec![estimate];
        if let Some(prev) = self.rows.last() {
            for j in 1..=prev.len().min(MAX_COLUMNS) {
                let factor = 1.0 / ((1u64 << j) as f64 - 1.0);
                let next: Vec<Complex64> = row[j - 1]
                    .iter()
                    .zip(&prev[j - 1])
                    .map(|(a, b)| a + (a - b) * factor)
                    .collect();
                row.push(next);
            }
        }
        self.rows.push(row);
    }

    pub fn best(&self) -> &[Complex64] {
        self.rows.last().and_then(|r| r.last()).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Largest entrywise change between the last two extrapolated estimates.
    pub fn delta(&self) -> f64 {
        let n = self.rows.len();
        if n < 2 {
            return f64::INFINITY;
        }
        let a = self.rows[n - 1].last().unwrap();
        let b = self.rows[n - 2].last().unwrap();
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    pub fn levels(&self) -> usize {
        self.rows.len()
    }

    /// Unextrapolated estimates of entry `i`, one per level.
    pub fn raw_entry(&self, i: usize) -> Vec<Complex64> {
        self.raw.iter().map(|r| r[i]).collect()
    }
}

/// Result of a refined quadrature: best estimates plus the last change.
#[derive(Debug, Clone)]
pub(crate) struct Refined {
    pub values: Vec<Complex64>,
    pub level: u32,
    pub last_delta: f64,
    pub converged: bool,
}

/// Runs `step(level)` on successively finer grids until the Richardson
/// estimates settle below `tol`, or `max_level` is reached.
pub(crate) fn refine<S>(min_level: u32, max_level: u32, tol: f64, mut step: S) -> Result<Refined>
where
    S: FnMut(u32) -> Result<Vec<Complex64>>,
{
    let mut tableau = Tableau::default();
    let mut level = min_level;
    loop {
        tableau.push(step(level)?);
        let delta = tableau.delta();
        let done = tableau.levels() >= 3 && delta < tol;
        if done || level >= max_level {
            return Ok(Refined {
                values: tableau.best().to_vec(),
                level,
                last_delta: delta,
                converged: done,
            });
        }
        level += 1;
    }
}

/// Smallest grid level that resolves frequencies up to `kmax` without aliasing.
pub(crate) fn min_level_for(kmax: i64) -> u32 {
    let need = (4 * kmax + 4).max(32) as u64;
    64 - (need - 1).leading_zeros()
}

/// Monte Carlo means of several functionals of `f` over `T^d`.
///
/// Returns `(mean, standard error)` per functional. Each chunk of points uses
/// its own ChaCha stream so the result does not depend on the thread count.
pub(crate) fn monte_carlo<G>(spec: &SymbolSpec, points: usize, seed: u64, g: G) -> Result<Vec<(f64, f64)>>
where
    G: Fn(f64, &[f64]) -> Vec<f64> + Sync,
{
    const MC_CHUNK: usize = 1 << 16;
    let d = spec.dim;
    let chunks = points.div_ceil(MC_CHUNK);
    let partial: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<(Vec<f64>, Vec<f64>)> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = MC_CHUNK.min(points - c * MC_CHUNK);
            let mut x = vec![0.0; d];
            let mut sum: Vec<f64> = Vec::new();
            let mut sq: Vec<f64> = Vec::new();
            for _ in 0..count {
                for t in x.iter_mut() {
                    *t = rng.random::<f64>();
                }
                let v = match spec.eval_reduced(&x) {
                    Ok(v) => v,
                    // measure-zero singular set: redraw is equivalent to skipping
                    Err(Error::Singularity { .. }) => continue,
                    Err(e) => return Err(e),
                };
                let out = g(v, &x);
                if sum.is_empty() {
                    sum = vec![0.0; out.len()];
                    sq = vec![0.0; out.len()];
                }
                for (i, o) in out.iter().enumerate() {
                    sum[i] += o;
                    sq[i] += o * o;
                }
            }
            Ok((sum, sq))
        })
        .collect::<Result<_>>()?;
    let width = partial.iter().map(|p| p.0.len()).max().unwrap_or(0);
    let mut sum = vec![0.0; width];
    let mut sq = vec![0.0; width];
    for (s, q) in &partial {
        for i in 0..s.len() {
            sum[i] += s[i];
            sq[i] += q[i];
        }
    }
    let n = points as f64;
    Ok(sum
        .iter()
        .zip(&sq)
        .map(|(s, q)| {
            let mean = s / n;
            let var = (q / n - mean * mean).max(0.0);
            (mean, (var / n).sqrt())
        })
        .collect())
}
