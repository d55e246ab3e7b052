//! Uniform spanning trees of the `n × n` torus by Wilson's algorithm, and
//! their edge processes compared against `P^f`.
//!
//! Vertex `(x, y)` has index `x * n + y`. The edge `(v, Right)` joins `(x, y)`
//! and `(x + 1, y)`; `(v, Up)` joins `(x, y)` and `(x, y + 1)`, all mod `n`.
//! Tree `s` of a run with seed `seed` uses a `ChaCha8` generator from
//! `seed_from_u64(seed)` on stream `s`.

use std::io::Write;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::Site;
use crate::sampling::Pattern;
use crate::spectral::{fourier_coeffs, CoeffTable, Provenance, QuadParams};
use crate::symbol::{Builtin, SymbolSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Right,
    Up,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusTree {
    pub n: usize,
    /// `right[v]`: the edge `(v, Right)` is in the tree.
    pub right: Vec<bool>,
    pub up: Vec<bool>,
}

/// Finite-size allowance for comparisons at `n = 64`.
pub const FINITE_SIZE_ALLOWANCE: f64 = 0.01;

fn vertex(n: usize, x: usize, y: usize) -> usize {
    (x % n) * n + (y % n)
}

/// Neighbours in the order right, up, left, down.
fn neighbours(n: usize) -> Vec<[u32; 4]> {
    (0..n * n)
        .map(|v| {
            let (x, y) = (v / n, v % n);
            [
                vertex(n, x + 1, y) as u32,
                vertex(n, x, y + 1) as u32,
                vertex(n, x + n - 1, y) as u32,
                vertex(n, x, y + n - 1) as u32,
            ]
        })
        .collect()
}

/// Uniform spanning tree of the `n × n` torus (stream 0 of `seed`).
pub fn wilson_ust(n: usize, seed: u64) -> Result<TorusTree> {
    wilson_ust_stream(n, seed, 0)
}

/// Wilson's algorithm with a uniformly random root.
pub fn wilson_ust_stream(n: usize, seed: u64, stream: u64) -> Result<TorusTree> {
    if !(2..=256).contains(&n) {
        return Err(Error::InvalidParameter {
            name: "n".into(),
            message: format!("torus side {n} outside 2..=256"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let nbr = neighbours(n);
    let nv = n * n;
    let mut in_tree = vec![false; nv];
    let mut next = vec![0u8; nv];
    let root = rng.random_range(0..nv);
    in_tree[root] = true;

    // two random bits per step
    let mut bits = 0u64;
    let mut left = 0u32;
    for start in 0..nv {
        let mut u = start;
        while !in_tree[u] {
            if left == 0 {
                bits = rng.next_u64();
                left = 32;
            }
            let d = (bits & 3) as u8;
            bits >>= 2;
            left -= 1;
            next[u] = d;
            u = nbr[u][d as usize] as usize;
        }
        // the last exit from each vertex is its loop-erased step
        let mut u = start;
        while !in_tree[u] {
            in_tree[u] = true;
            u = nbr[u][next[u] as usize] as usize;
        }
    }

    let mut right = vec![false; nv];
    let mut up = vec![false; nv];
    for v in (0..nv).filter(|&v| v != root) {
        let w = nbr[v][next[v] as usize] as usize;
        match next[v] {
            0 => right[v] = true,
            1 => up[v] = true,
            2 => right[w] = true,
            _ => up[w] = true,
        }
    }
    Ok(TorusTree { n, right, up })
}

impl TorusTree {
    pub fn edge_count(&self) -> usize {
        self.right.iter().chain(&self.up).filter(|b| **b).count()
    }

    pub fn has_edge(&self, x: usize, y: usize, dir: Direction) -> bool {
        let v = vertex(self.n, x, y);
        match dir {
            Direction::Right => self.right[v],
            Direction::Up => self.up[v],
        }
    }

    /// `n² - 1` edges and connected (hence acyclic).
    pub fn is_spanning_tree(&self) -> bool {
        let n = self.n;
        let nv = n * n;
        if self.edge_count() != nv - 1 {
            return false;
        }
        let nbr = neighbours(n);
        let mut seen = vec![false; nv];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            let (x, y) = (v / n, v % n);
            let left = vertex(n, x + n - 1, y);
            let down = vertex(n, x, y + n - 1);
            let edges = [
                (self.right[v], nbr[v][0]),
                (self.up[v], nbr[v][1]),
                (self.right[left], nbr[v][2]),
                (self.up[down], nbr[v][3]),
            ];
            for (present, w) in edges {
                let w = w as usize;
                if present && !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == nv
    }

    /// Bitmask of all `2n²` edges (for small trees).
    pub fn edge_mask(&self) -> u128 {
        self.right
            .iter()
            .chain(&self.up)
            .enumerate()
            .fold(0u128, |m, (i, &b)| m | (b as u128) << i)
    }

    /// Edge list `x,y,direction`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["x", "y", "direction"]).map_err(|e| Error::Io(e.to_string()))?;
        for v in 0..self.n * self.n {
            let (x, y) = ((v / self.n).to_string(), (v % self.n).to_string());
            for (present, dir) in [(self.right[v], "right"), (self.up[v], "up")] {
                if present {
                    wr.write_record([x.as_str(), y.as_str(), dir])
                        .map_err(|e| Error::Io(e.to_string()))?;
                }
            }
        }
        wr.flush()?;
        Ok(())
    }
}

/// Which edge indicators to read off a tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeProcess {
    /// Horizontal edges `(x, y)`, the full two-dimensional field.
    Field,
    /// Horizontal edges `(k, 0)`.
    XAxis,
    /// Horizontal edges `(k, k)`.
    Diagonal,
    /// `e_{2m}` = horizontal edge at `(m, m)`, `e_{2m+1}` = vertical edge at `(m+1, m)`.
    Zigzag,
}

impl EdgeProcess {
    /// Period of the process on the `n` torus, per axis.
    pub fn shape(self, n: usize) -> Vec<usize> {
        match self {
            EdgeProcess::Field => vec![n, n],
            EdgeProcess::XAxis | EdgeProcess::Diagonal => vec![n],
            EdgeProcess::Zigzag => vec![2 * n],
        }
    }

    pub fn dim(self) -> usize {
        if self == EdgeProcess::Field {
            2
        } else {
            1
        }
    }
}

/// Indicator pattern of the chosen edges, sites in row-major order.
pub fn edge_process(tree: &TorusTree, kind: EdgeProcess) -> Pattern {
    let n = tree.n;
    let (window, bits): (Vec<Site>, Vec<bool>) = match kind {
        EdgeProcess::Field => (0..n * n)
            .map(|v| (vec![(v / n) as i64, (v % n) as i64], tree.right[v]))
            .unzip(),
        EdgeProcess::XAxis => (0..n)
            .map(|k| (vec![k as i64], tree.has_edge(k, 0, Direction::Right)))
            .unzip(),
        EdgeProcess::Diagonal => (0..n)
            .map(|k| (vec![k as i64], tree.has_edge(k, k, Direction::Right)))
            .unzip(),
        EdgeProcess::Zigzag => (0..2 * n)
            .map(|i| {
                let m = i / 2;
                let b = if i % 2 == 0 {
                    tree.has_edge(m, m, Direction::Right)
                } else {
                    tree.has_edge(m + 1, m, Direction::Up)
                };
                (vec![i as i64], b)
            })
            .unzip(),
    };
    Pattern { window, bits }
}

/// Periodic edge-process samples, each of length `Π shape`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessSamples {
    pub kind: EdgeProcess,
    pub n: usize,
    pub shape: Vec<usize>,
    pub samples: Vec<Vec<bool>>,
}

/// `count` trees on the `n` torus (tree `s` on stream `s`), reduced to one process.
pub fn ust_samples(n: usize, count: usize, seed: u64, kind: EdgeProcess) -> Result<ProcessSamples> {
    let samples = (0..count as u64)
        .into_par_iter()
        .map(|s| wilson_ust_stream(n, seed, s).map(|t| edge_process(&t, kind).bits))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProcessSamples {
        kind,
        n,
        shape: kind.shape(n),
        samples,
    })
}

/// Several processes read off the same `count` trees.
pub fn ust_samples_multi(
    n: usize,
    count: usize,
    seed: u64,
    kinds: &[EdgeProcess],
) -> Result<Vec<ProcessSamples>> {
    let per_tree = (0..count as u64)
        .into_par_iter()
        .map(|s| {
            let t = wilson_ust_stream(n, seed, s)?;
            Ok(kinds.iter().map(|&k| edge_process(&t, k).bits).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(kinds
        .iter()
        .enumerate()
        .map(|(i, &kind)| ProcessSamples {
            kind,
            n,
            shape: kind.shape(n),
            samples: per_tree.iter().map(|bits| bits[i].clone()).collect(),
        })
        .collect())
}

/// Coefficients of the infinite-volume law of an edge process, radius `kmax`.
pub fn process_table(kind: EdgeProcess, kmax: i64, quad: &QuadParams) -> Result<CoeffTable> {
    match kind {
        EdgeProcess::Field => fourier_coeffs(&SymbolSpec::builtin(Builtin::Ust2d), &[kmax, kmax], quad),
        EdgeProcess::XAxis => fourier_coeffs(&SymbolSpec::builtin(Builtin::UstAxisG), &[kmax], quad),
        EdgeProcess::Zigzag => fourier_coeffs(&SymbolSpec::builtin(Builtin::Zigzag), &[kmax], quad),
        EdgeProcess::Diagonal => {
            let t = fourier_coeffs(&SymbolSpec::builtin(Builtin::Ust2d), &[kmax, kmax], quad)?;
            let from = Box::new(t.provenance.clone());
            Ok(CoeffTable::from_fn(
                &[kmax],
                Provenance::Derived {
                    from,
                    op: "diagonal".into(),
                },
                |k| t.get(&[k[0], k[0]]).expect("inside the table"),
            ))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagComparison {
    pub lag: Vec<i64>,
    pub empirical: f64,
    pub se: f64,
    pub predicted: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub kind: EdgeProcess,
    pub n: usize,
    pub samples: usize,
    pub allowance: f64,
    /// Site density against `f^(0)`.
    pub mean: LagComparison,
    /// Covariances against `-|f^(k)|²`.
    pub lags: Vec<LagComparison>,
}

impl ComparisonReport {
    pub fn pass(&self) -> bool {
        self.mean.pass && self.lags.iter().all(|l| l.pass)
    }
}

fn shifted(shape: &[usize], idx: usize, lag: &[i64]) -> usize {
    let mut rem = idx;
    let mut coords = vec![0usize; shape.len()];
    for a in (0..shape.len()).rev() {
        coords[a] = rem % shape[a];
        rem /= shape[a];
    }
    coords.iter().zip(shape).zip(lag).fold(0, |acc, ((&c, &len), &l)| {
        acc * len + (c as i64 + l).rem_euclid(len as i64) as usize
    })
}

/// Mean and standard error over independent per-sample values.
fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, (var / n).sqrt())
}

/// Empirical density and lag covariances (averaged over all torus
/// translates) against `f^(0)` and `-|f^(k)|²`. Each entry passes when the
/// discrepancy is within `3σ + allowance`.
pub fn compare_to_symbol(
    samples: &ProcessSamples,
    table: &CoeffTable,
    lags: &[Vec<i64>],
    allowance: f64,
) -> Result<ComparisonReport> {
    if samples.samples.len() < 2 {
        return Err(Error::EmptyBatch);
    }
    if table.dim != samples.shape.len() {
        return Err(Error::Precondition("table dimension does not match the process".into()));
    }
    let shape = &samples.shape;
    let len: usize = shape.iter().product();
    let dens: Vec<f64> = samples
        .samples
        .iter()
        .map(|s| s.iter().filter(|b| **b).count() as f64 / len as f64)
        .collect();
    let (mean, mean_err) = mean_se(&dens);
    let f0 = table.mean();
    let judge = |lag: Vec<i64>, emp: f64, se: f64, pred: f64| LagComparison {
        pass: (emp - pred).abs() <= 3.0 * se + allowance,
        lag,
        empirical: emp,
        se,
        predicted: pred,
    };
    let mean_row = judge(vec![0; shape.len()], mean, mean_err, f0);

    let mut rows = Vec::new();
    for lag in lags {
        let pred = -table.get(lag)?.norm_sqr();
        // per-sample centred products, centred at the pooled density
        let per: Vec<f64> = samples
            .samples
            .iter()
            .map(|s| {
                (0..len)
                    .map(|i| {
                        let a = s[i] as u8 as f64 - mean;
                        let b = s[shifted(shape, i, lag)] as u8 as f64 - mean;
                        a * b
                    })
                    .sum::<f64>()
                    / len as f64
            })
            .collect();
        let (cov, se) = mean_se(&per);
        rows.push(judge(lag.clone(), cov, se, pred));
    }
    Ok(ComparisonReport {
        kind: samples.kind,
        n: samples.n,
        samples: samples.samples.len(),
        allowance,
        mean: mean_row,
        lags: rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn small_trees_are_spanning() {
        for seed in 0..50 {
            let t = wilson_ust(2, seed).unwrap();
            assert_eq!(t.edge_count(), 3);
            assert!(t.is_spanning_tree());
            assert!(wilson_ust(7, seed).unwrap().is_spanning_tree());
        }
    }

    #[test]
    fn edge_frequency_is_uniform() {
        let n = 4;
        let count = 10_000;
        let hits = (0..count)
            .filter(|&s| wilson_ust_stream(n, 5, s).unwrap().right[0])
            .count() as f64;
        let p = 15.0 / 32.0;
        let sigma = (p * (1.0 - p) / count as f64).sqrt();
        assert!((hits / count as f64 - p).abs() < 4.0 * sigma);
    }

    #[test]
    fn three_torus_chi_square() {
        // the 3 × 3 torus has 11664 spanning trees
        let count = 100_000u64;
        let mut freq: HashMap<u128, u32> = HashMap::new();
        for s in 0..count {
            *freq.entry(wilson_ust_stream(3, 1, s).unwrap().edge_mask()).or_default() += 1;
        }
        assert!(freq.len() <= 11664);
        let k = 11664.0;
        let e = count as f64 / k;
        let observed: f64 = freq.values().map(|&o| (o as f64 - e).powi(2) / e).sum();
        let chi2 = observed + (k - freq.len() as f64) * e;
        // df = 11663; reject beyond about 4.5 standard deviations
        let df = k - 1.0;
        assert!((chi2 - df).abs() < 4.5 * (2.0 * df).sqrt(), "chi2 {chi2}");
    }

    #[test]
    fn zigzag_path_shape() {
        let t = wilson_ust(8, 3).unwrap();
        let p = edge_process(&t, EdgeProcess::Zigzag);
        assert_eq!(p.bits.len(), 16);
        assert_eq!(p.bits[1], t.up[vertex(8, 1, 0)]);
    }

    #[test]
    fn diagonal_table_is_fair_coins() {
        let t = process_table(EdgeProcess::Diagonal, 3, &QuadParams::default()).unwrap();
        assert!((t.mean() - 0.5).abs() < 1e-12);
        for k in 1..=3 {
            assert!(t.get1(k).unwrap().norm() < 1e-9);
        }
    }

    #[test]
    fn multi_matches_single() {
        let multi = ust_samples_multi(6, 20, 9, &[EdgeProcess::XAxis, EdgeProcess::Zigzag]).unwrap();
        let single = ust_samples(6, 20, 9, EdgeProcess::Zigzag).unwrap();
        assert_eq!(multi[1], single);
    }

    #[test]
    fn shifted_wraps() {
        assert_eq!(shifted(&[4, 4], 3, &[0, 1]), 0);
        assert_eq!(shifted(&[4, 4], 3, &[1, 0]), 7);
        assert_eq!(shifted(&[5], 4, &[2]), 1);
    }
}
