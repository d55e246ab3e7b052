//! Exact sequential sampling on finite windows.
//!
//! Sites are visited in a fixed order. After each draw the remaining kernel
//! is replaced by the conditional kernel, a rank-one Schur update: after a 1
//! at site `i`, `K -= K[:,i] K[i,:] / K[i,i]`; after a 0, the same with
//! `K[i,i] - 1` in the denominator.
//!
//! Randomness: sample `s` of a batch with seed `seed` uses a `ChaCha8`
//! generator seeded by `seed_from_u64(seed)` on stream `s`, and draws one
//! uniform `f64` per site in visiting order.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{cond_from_kernel, kernel_matrix, Pmf, Site, DEGENERACY, WINDOW_CAP};
use crate::linalg::CMat;
use crate::spectral::CoeffTable;

/// Largest window accepted by the sampler.
pub const SAMPLE_CAP: usize = 4096;

/// `η` restricted to a window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    pub window: Vec<Site>,
    pub bits: Vec<bool>,
}

/// Samples on a common window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub window: Vec<Site>,
    pub seed: u64,
    pub samples: Vec<Vec<bool>>,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Visiting order: window positions sorted lexicographically by site.
fn lex_order(window: &[Site]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..window.len()).collect();
    order.sort_by(|&a, &b| window[a].cmp(&window[b]));
    order
}

fn check_window(window: &[Site]) -> Result<()> {
    if window.len() > SAMPLE_CAP {
        return Err(Error::WindowTooLarge {
            size: window.len(),
            cap: SAMPLE_CAP,
        });
    }
    Ok(())
}

/// One draw, visiting the rows of `k` in the order given.
fn draw_schur(mut k: CMat, order: &[usize], rng: &mut ChaCha8Rng) -> Result<Vec<bool>> {
    let n = k.n;
    let mut bits = vec![false; n];
    let mut pending: Vec<usize> = order.to_vec();
    while let Some((&i, rest)) = pending.split_first() {
        let p = k.get(i, i).re.clamp(0.0, 1.0);
        let u: f64 = rng.random();
        let one = u < p;
        bits[i] = one;
        let pivot = if one { k.get(i, i) } else { k.get(i, i) - 1.0 };
        if pivot.norm() < DEGENERACY {
            return Err(Error::DegenerateConditioning {
                value: if one { p } else { 1.0 - p },
            });
        }
        let inv = pivot.inv();
        let col: Vec<Complex64> = rest.iter().map(|&j| k.get(j, i)).collect();
        let row: Vec<Complex64> = rest.iter().map(|&j| k.get(i, j) * inv).collect();
        for (a, &j) in rest.iter().enumerate() {
            if col[a].norm() == 0.0 {
                continue;
            }
            for (b, &l) in rest.iter().enumerate() {
                let v = k.get(j, l) - col[a] * row[b];
                k.set(j, l, v);
            }
        }
        pending = rest.to_vec();
    }
    Ok(bits)
}

/// Reference sampler: each conditional is a fresh determinant ratio.
fn draw_naive(k: &CMat, order: &[usize], rng: &mut ChaCha8Rng) -> Result<Vec<bool>> {
    let n = k.n;
    let mut bits = vec![false; n];
    for (step, &i) in order.iter().enumerate() {
        let seen = &order[..step];
        let idx: Vec<usize> = seen.iter().copied().chain([i]).collect();
        let sub = CMat::from_fn(idx.len(), |a, b| k.get(idx[a], idx[b]));
        let is_zero: Vec<bool> = idx.iter().map(|&j| j != i && !bits[j]).collect();
        let p = if step == 0 {
            k.get(i, i).re.clamp(0.0, 1.0)
        } else {
            cond_from_kernel(&sub, &is_zero)?
        };
        let u: f64 = rng.random();
        bits[i] = u < p;
    }
    Ok(bits)
}

/// One exact sample of `η` on `window`, visiting sites in lexicographic order.
pub fn sample_window(table: &CoeffTable, window: &[Site], seed: u64) -> Result<Pattern> {
    sample_window_in_order(table, window, &lex_order(window), seed, 0)
}

/// One sample visiting window positions in `order`, on RNG stream `stream`.
pub fn sample_window_in_order(
    table: &CoeffTable,
    window: &[Site],
    order: &[usize],
    seed: u64,
    stream: u64,
) -> Result<Pattern> {
    check_window(window)?;
    let k = kernel_matrix(table, window)?;
    let bits = draw_schur(k, order, &mut stream_rng(seed, stream))?;
    Ok(Pattern {
        window: window.to_vec(),
        bits,
    })
}

/// The full-recompute reference for [`sample_window`]; same draws, same RNG use.
pub fn sample_window_naive(table: &CoeffTable, window: &[Site], seed: u64) -> Result<Pattern> {
    check_window(window)?;
    let k = kernel_matrix(table, window)?;
    let bits = draw_naive(&k, &lex_order(window), &mut stream_rng(seed, 0))?;
    Ok(Pattern {
        window: window.to_vec(),
        bits,
    })
}

/// `count` independent samples; sample `s` uses stream `s`.
pub fn sample_batch(table: &CoeffTable, window: &[Site], count: usize, seed: u64) -> Result<SampleBatch> {
    sample_batch_in_order(table, window, &lex_order(window), count, seed)
}

pub fn sample_batch_in_order(
    table: &CoeffTable,
    window: &[Site],
    order: &[usize],
    count: usize,
    seed: u64,
) -> Result<SampleBatch> {
    check_window(window)?;
    let k = kernel_matrix(table, window)?;
    let samples = (0..count as u64)
        .into_par_iter()
        .map(|s| draw_schur(k.clone(), order, &mut stream_rng(seed, s)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleBatch {
        window: window.to_vec(),
        seed,
        samples,
    })
}

/// Keep each 1 independently with probability `p`. Sample `s` uses stream
/// `s` of `seed` and draws one uniform per site.
pub fn thin(batch: &SampleBatch, p: f64, seed: u64) -> Result<SampleBatch> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter {
            name: "p".into(),
            message: format!("thinning probability {p} outside [0,1]"),
        });
    }
    let samples = batch
        .samples
        .par_iter()
        .enumerate()
        .map(|(s, bits)| {
            let mut rng = stream_rng(seed, s as u64);
            bits.iter()
                .map(|&b| {
                    let u: f64 = rng.random();
                    b && u < p
                })
                .collect()
        })
        .collect();
    Ok(SampleBatch {
        window: batch.window.clone(),
        seed,
        samples,
    })
}

/// Estimate with a standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalStats {
    pub n_samples: usize,
    pub frequencies: Vec<Estimate>,
    /// `covariances[i][j]` for window positions `i, j`, jackknife errors.
    pub covariances: Vec<Vec<Estimate>>,
    /// Pattern bit string to count, sorted by pattern.
    pub pattern_counts: Vec<(String, u64)>,
}

fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn pattern(&self, s: usize) -> Pattern {
        Pattern {
            window: self.window.clone(),
            bits: self.samples[s].clone(),
        }
    }

    /// Empirical law on the window (window at most 20 sites).
    pub fn empirical_pmf(&self) -> Result<Pmf> {
        let n = self.window.len();
        if n > WINDOW_CAP {
            return Err(Error::WindowTooLarge { size: n, cap: WINDOW_CAP });
        }
        if self.samples.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let mut probs = vec![0.0; 1 << n];
        for bits in &self.samples {
            let idx = bits.iter().enumerate().fold(0usize, |a, (i, &b)| a | (b as usize) << i);
            probs[idx] += 1.0;
        }
        let total = self.samples.len() as f64;
        probs.iter_mut().for_each(|p| *p /= total);
        Ok(Pmf {
            window: self.window.clone(),
            probs,
        })
    }

    /// Empirical frequency of "all listed positions equal the given bits".
    pub fn cylinder_frequency(&self, positions: &[usize], bits: &[bool]) -> Result<Estimate> {
        if self.samples.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let hits = self
            .samples
            .iter()
            .filter(|s| positions.iter().zip(bits).all(|(&i, &b)| s[i] == b))
            .count() as f64;
        let n = self.samples.len() as f64;
        let p = hits / n;
        Ok(Estimate {
            value: p,
            se: (p * (1.0 - p) / n).sqrt(),
        })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let header: Vec<String> = self
            .window
            .iter()
            .map(|s| s.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("_"))
            .map(|s| format!("s{s}"))
            .collect();
        wr.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
        for bits in &self.samples {
            wr.write_record(bits.iter().map(|&b| if b { "1" } else { "0" }))
                .map_err(|e| Error::Io(e.to_string()))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn sidecar_json(&self) -> serde_json::Value {
        serde_json::json!({
            "seed": self.seed,
            "window": self.window,
            "samples": self.samples.len(),
            "generator": "ChaCha8, seed_from_u64(seed), stream = sample index, one f64 per site",
        })
    }

    /// Writes `<stem>.csv` and `<stem>.json`.
    pub fn export(&self, stem: &Path) -> Result<()> {
        let csv_file = std::fs::File::create(stem.with_extension("csv"))?;
        self.write_csv(std::io::BufWriter::new(csv_file))?;
        let text = serde_json::to_string_pretty(&self.sidecar_json())
            .map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(stem.with_extension("json"), text)?;
        Ok(())
    }
}

/// Site frequencies, pairwise covariances with jackknife standard errors,
/// and pattern counts.
pub fn empirical_stats(batch: &SampleBatch) -> Result<EmpiricalStats> {
    let n = batch.samples.len();
    if n == 0 {
        return Err(Error::EmptyBatch);
    }
    let w = batch.window.len();
    let nf = n as f64;
    let x = |s: usize, i: usize| batch.samples[s][i] as u8 as f64;
    let sums: Vec<f64> = (0..w).map(|i| (0..n).map(|s| x(s, i)).sum()).collect();
    let frequencies = sums
        .iter()
        .map(|&c| {
            let p = c / nf;
            Estimate {
                value: p,
                se: (p * (1.0 - p) / nf).sqrt(),
            }
        })
        .collect();

    let covariances = (0..w)
        .into_par_iter()
        .map(|i| {
            (0..w)
                .map(|j| {
                    let sij: f64 = (0..n).map(|s| x(s, i) * x(s, j)).sum();
                    let cov = sij / nf - sums[i] * sums[j] / (nf * nf);
                    if n < 2 {
                        return Estimate { value: cov, se: f64::NAN };
                    }
                    // delete-one jackknife
                    let m = nf - 1.0;
                    let loo: Vec<f64> = (0..n)
                        .map(|s| {
                            let (a, b) = (x(s, i), x(s, j));
                            (sij - a * b) / m - (sums[i] - a) * (sums[j] - b) / (m * m)
                        })
                        .collect();
                    let mean = loo.iter().sum::<f64>() / nf;
                    let var = loo.iter().map(|v| (v - mean).powi(2)).sum::<f64>() * (nf - 1.0) / nf;
                    Estimate {
                        value: cov,
                        se: var.sqrt(),
                    }
                })
                .collect()
        })
        .collect();

    let mut counts = std::collections::BTreeMap::new();
    for bits in &batch.samples {
        *counts.entry(bit_string(bits)).or_insert(0u64) += 1;
    }
    Ok(EmpiricalStats {
        n_samples: n,
        frequencies,
        covariances,
        pattern_counts: counts.into_iter().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{joint_pmf, line};
    use crate::spectral::{fourier_coeffs, QuadParams};
    use crate::symbol::parse_symbol;

    fn table(text: &str, kmax: i64) -> CoeffTable {
        fourier_coeffs(&parse_symbol(text, 1).unwrap(), &[kmax], &QuadParams::default()).unwrap()
    }

    #[test]
    fn schur_matches_naive_reference() {
        let t = table("renewal(0.5)", 12);
        let w = line(0..10);
        for seed in 0..20 {
            let a = sample_window(&t, &w, seed).unwrap();
            let b = sample_window_naive(&t, &w, seed).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let t = table("sin2", 8);
        let a = sample_batch(&t, &line(0..8), 100, 7).unwrap();
        let b = sample_batch(&t, &line(0..8), 100, 7).unwrap();
        assert_eq!(a, b);
        let c = sample_batch(&t, &line(0..8), 100, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sin2_tv_small() {
        let t = table("sin2", 8);
        let w = line(0..6);
        let batch = sample_batch(&t, &w, 40_000, 1).unwrap();
        let exact = joint_pmf(&t, &w).unwrap();
        assert!(batch.empirical_pmf().unwrap().total_variation(&exact) < 0.02);
    }

    #[test]
    fn thinning_extremes() {
        let t = table("sin2", 8);
        let batch = sample_batch(&t, &line(0..5), 200, 3).unwrap();
        assert_eq!(thin(&batch, 1.0, 9).unwrap().samples, batch.samples);
        assert!(thin(&batch, 0.0, 9).unwrap().samples.iter().flatten().all(|b| !b));
    }

    #[test]
    fn covariance_lag_one() {
        let t = table("sin2", 8);
        let batch = sample_batch(&t, &line(0..4), 40_000, 11).unwrap();
        let st = empirical_stats(&batch).unwrap();
        let c = st.covariances[0][1];
        assert!((c.value + 1.0 / 16.0).abs() < 4.0 * c.se + 1e-3, "{c:?}");
        assert_eq!(st.pattern_counts.iter().map(|(_, c)| c).sum::<u64>(), 40_000);
    }

    #[test]
    fn empty_batch() {
        let b = SampleBatch {
            window: line(0..2),
            seed: 0,
            samples: vec![],
        };
        assert!(matches!(empirical_stats(&b), Err(Error::EmptyBatch)));
    }
}
