use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{cylinder_matrix, kernel_matrix, Site, DET_SLACK};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::spectral::CoeffTable;

/// Largest window for exhaustive enumeration.
pub const WINDOW_CAP: usize = 20;

/// Joint law of `η` on a finite window.
///
/// Pattern index `idx` has bit `i` equal to the value at `window[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    pub window: Vec<Site>,
    pub probs: Vec<f64>,
}

#[derive(Serialize)]
struct PmfRow {
    pattern: String,
    probability: f64,
}

impl Pmf {
    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    /// Bit string of a pattern index, character `i` for `window[i]`.
    pub fn pattern_string(&self, idx: usize) -> String {
        (0..self.len()).map(|i| if idx >> i & 1 == 1 { '1' } else { '0' }).collect()
    }

    pub fn prob(&self, bits: &[bool]) -> f64 {
        let idx = bits.iter().enumerate().fold(0usize, |acc, (i, b)| acc | (*b as usize) << i);
        self.probs[idx]
    }

    /// Law of the sites listed by their window positions.
    pub fn marginal(&self, keep: &[usize]) -> Pmf {
        let mut probs = vec![0.0; 1 << keep.len()];
        for (idx, p) in self.probs.iter().enumerate() {
            let sub = keep
                .iter()
                .enumerate()
                .fold(0usize, |acc, (j, &i)| acc | (idx >> i & 1) << j);
            probs[sub] += p;
        }
        Pmf {
            window: keep.iter().map(|&i| self.window[i].clone()).collect(),
            probs,
        }
    }

    /// Law of `1 - η`.
    pub fn flipped(&self) -> Pmf {
        let mask = (1usize << self.len()) - 1;
        Pmf {
            window: self.window.clone(),
            probs: (0..self.probs.len()).map(|idx| self.probs[idx ^ mask]).collect(),
        }
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        self.probs.iter().filter(|p| **p > 0.0).map(|p| -p * p.ln()).sum()
    }

    pub fn total_variation(&self, other: &Pmf) -> f64 {
        0.5 * self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    /// Each one is independently kept with probability `p`.
    pub fn thinned(&self, p: f64) -> Pmf {
        let mut out = vec![0.0; self.probs.len()];
        for (idx, &mass) in self.probs.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            // enumerate sub-patterns of idx
            let mut sub = idx;
            loop {
                let kept = sub.count_ones() as i32;
                let lost = (idx.count_ones() - sub.count_ones()) as i32;
                out[sub] += mass * p.powi(kept) * (1.0 - p).powi(lost);
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & idx;
            }
        }
        Pmf {
            window: self.window.clone(),
            probs: out,
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for (idx, p) in self.probs.iter().enumerate() {
            wr.serialize(PmfRow {
                pattern: self.pattern_string(idx),
                probability: *p,
            })
            .map_err(|e| Error::Io(e.to_string()))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "window": self.window,
            "probabilities": (0..self.probs.len())
                .map(|i| serde_json::json!({"pattern": self.pattern_string(i), "p": self.probs[i]}))
                .collect::<Vec<_>>(),
        })
    }
}

/// Every cylinder probability on `window`, by inclusion-exclusion
/// determinants.
pub fn joint_pmf(table: &CoeffTable, window: &[Site]) -> Result<Pmf> {
    if window.len() > WINDOW_CAP {
        return Err(Error::WindowTooLarge {
            size: window.len(),
            cap: WINDOW_CAP,
        });
    }
    let mut sorted = window.to_vec();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != window.len() {
        return Err(Error::Precondition("window sites must be distinct".into()));
    }
    let k = kernel_matrix(table, window)?;
    let mut pmf = joint_pmf_from_kernel(&k)?;
    pmf.window = window.to_vec();
    Ok(pmf)
}

/// Pattern law for an explicit kernel matrix; the window is left empty.
pub fn joint_pmf_from_kernel(k: &CMat) -> Result<Pmf> {
    let n = k.n;
    if n > WINDOW_CAP {
        return Err(Error::WindowTooLarge { size: n, cap: WINDOW_CAP });
    }
    let probs: Vec<f64> = (0..1usize << n)
        .into_par_iter()
        .map(|idx| {
            let is_zero: Vec<bool> = (0..n).map(|i| idx >> i & 1 == 0).collect();
            let v = cylinder_matrix(k, &is_zero).det().re;
            if v < -DET_SLACK {
                Err(Error::NegativeDeterminant { value: v })
            } else {
                Ok(v.max(0.0))
            }
        })
        .collect::<Result<_>>()?;
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Consistency(format!("pattern probabilities sum to {total}")));
    }
    Ok(Pmf {
        window: Vec::new(),
        probs: probs.into_iter().map(|p| p / total).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::line;
    use crate::spectral::{fourier_coeffs, QuadParams};
    use crate::symbol::parse_symbol;

    fn table(text: &str, dim: usize, kmax: i64) -> CoeffTable {
        fourier_coeffs(&parse_symbol(text, dim).unwrap(), &vec![kmax; dim], &QuadParams::default())
            .unwrap()
    }

    #[test]
    fn constant_pair() {
        let p = 0.3;
        let pmf = joint_pmf(&table("0.3", 1, 2), &line([0, 1])).unwrap();
        assert!((pmf.prob(&[true, true]) - p * p).abs() < 1e-15);
        assert!((pmf.prob(&[true, false]) - p * (1.0 - p)).abs() < 1e-15);
        assert!((pmf.prob(&[false, false]) - (1.0 - p) * (1.0 - p)).abs() < 1e-15);
    }

    #[test]
    fn ust2d_diagonal_is_fair_coins() {
        let t = table("ust2d", 2, 3);
        let w = vec![vec![0, 0], vec![1, 1], vec![2, 2]];
        let pmf = joint_pmf(&t, &w).unwrap();
        for p in &pmf.probs {
            assert!((p - 0.125).abs() < 1e-9, "{p}");
        }
    }

    #[test]
    fn window_cap() {
        let t = table("0.5", 1, 30);
        assert!(matches!(
            joint_pmf(&t, &line(0..21)),
            Err(Error::WindowTooLarge { .. })
        ));
    }

    #[test]
    fn marginal_and_csv() {
        let pmf = joint_pmf(&table("sin2", 1, 4), &line(0..3)).unwrap();
        let m = pmf.marginal(&[0, 1]);
        assert!((m.prob(&[true, true]) - 3.0 / 16.0).abs() < 1e-14);
        let mut buf = Vec::new();
        pmf.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("pattern,probability\n000,"));
        assert_eq!(text.lines().count(), 9);
    }
}
