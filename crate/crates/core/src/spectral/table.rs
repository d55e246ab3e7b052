use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a coefficient table was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Provenance {
    ClosedForm,
    /// Midpoint rule with Richardson refinement; `level` is log2 of the points per axis.
    Quadrature { level: u32, last_delta: f64 },
    MonteCarlo { points: usize, std_err: f64 },
    /// Built from another table (e.g. by subsampling).
    Derived { from: Box<Provenance>, op: String },
}

/// Fourier coefficients `f^(k)` for `k` in the box `|k_j| <= kmax_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffTable {
    pub dim: usize,
    pub kmax: Vec<i64>,
    entries: Vec<Complex64>,
    pub provenance: Provenance,
}

impl CoeffTable {
    /// Builds a table from a coefficient function, enforcing hermitian
    /// symmetry by averaging `c(k)` with `conj(c(-k))`.
    pub fn from_fn(
        kmax: &[i64],
        provenance: Provenance,
        mut c: impl FnMut(&[i64]) -> Complex64,
    ) -> CoeffTable {
        let dim = kmax.len();
        let len: usize = kmax.iter().map(|k| (2 * k + 1) as usize).product();
        let mut entries = Vec::with_capacity(len);
        let mut k = vec![0i64; dim];
        for idx in 0..len {
            Self::unflatten(kmax, idx, &mut k);
            entries.push(c(&k));
        }
        let mut table = CoeffTable {
            dim,
            kmax: kmax.to_vec(),
            entries,
            provenance,
        };
        table.symmetrize();
        table
    }

    /// Table of the constant symbol `p`.
    pub fn constant(p: f64, kmax: &[i64]) -> CoeffTable {
        CoeffTable::from_fn(kmax, Provenance::ClosedForm, |k| {
            if k.iter().all(|&v| v == 0) {
                Complex64::new(p, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    fn unflatten(kmax: &[i64], mut idx: usize, k: &mut [i64]) {
        for j in (0..kmax.len()).rev() {
            let w = (2 * kmax[j] + 1) as usize;
            k[j] = (idx % w) as i64 - kmax[j];
            idx /= w;
        }
    }

    fn index(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dim {
            return None;
        }
        let mut idx = 0usize;
        for (j, &kj) in k.iter().enumerate() {
            if kj.abs() > self.kmax[j] {
                return None;
            }
            idx = idx * (2 * self.kmax[j] + 1) as usize + (kj + self.kmax[j]) as usize;
        }
        Some(idx)
    }

    fn symmetrize(&mut self) {
        let mut k = vec![0i64; self.dim];
        for idx in 0..self.entries.len() {
            Self::unflatten(&self.kmax, idx, &mut k);
            let neg: Vec<i64> = k.iter().map(|v| -v).collect();
            let j = self.index(&neg).expect("box is symmetric");
            if j < idx {
                continue;
            }
            let avg = 0.5 * (self.entries[idx] + self.entries[j].conj());
            self.entries[idx] = avg;
            self.entries[j] = avg.conj();
        }
    }

    /// `f^(k)`, or an out-of-table error.
    pub fn get(&self, k: &[i64]) -> Result<Complex64> {
        self.index(k)
            .map(|i| self.entries[i])
            .ok_or_else(|| Error::OutOfTable {
                k: k.to_vec(),
                kmax: self.kmax.clone(),
            })
    }

    /// One-dimensional shorthand for [`CoeffTable::get`].
    pub fn get1(&self, k: i64) -> Result<Complex64> {
        self.get(&[k])
    }

    /// `f^(0)`, the arithmetic mean.
    pub fn mean(&self) -> f64 {
        self.get(&vec![0; self.dim]).map(|c| c.re).unwrap_or(0.0)
    }

    /// Iterates over `(k, f^(k))` in lexicographic order of `k`.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<i64>, Complex64)> + '_ {
        (0..self.entries.len()).map(move |idx| {
            let mut k = vec![0i64; self.dim];
            Self::unflatten(&self.kmax, idx, &mut k);
            (k, self.entries[idx])
        })
    }

    /// The table of the averaged symbol `f_r`, whose coefficients are
    /// `f^(r_1 k_1, ..., r_d k_d)`, on the largest box that fits.
    pub fn subsample(&self, r: &[u32]) -> Result<CoeffTable> {
        if r.len() != self.dim || r.contains(&0) {
            return Err(Error::Precondition(format!(
                "need {} positive subsampling factors, got {r:?}",
                self.dim
            )));
        }
        let kmax: Vec<i64> = self.kmax.iter().zip(r).map(|(k, r)| k / *r as i64).collect();
        self.subsample_box(r, &kmax)
    }

    /// As [`CoeffTable::subsample`] on an explicit output box.
    pub fn subsample_box(&self, r: &[u32], kmax: &[i64]) -> Result<CoeffTable> {
        if r.len() != self.dim || kmax.len() != self.dim || r.contains(&0) {
            return Err(Error::Precondition("subsample factor/box dimension mismatch".into()));
        }
        let scaled = |k: &[i64]| -> Vec<i64> { k.iter().zip(r).map(|(k, r)| k * *r as i64).collect() };
        let corner: Vec<i64> = scaled(kmax);
        self.get(&corner)?;
        let provenance = Provenance::Derived {
            from: Box::new(self.provenance.clone()),
            op: format!("subsample{r:?}"),
        };
        Ok(CoeffTable::from_fn(kmax, provenance, |k| {
            self.get(&scaled(k)).expect("corner checked")
        }))
    }

    /// The one-dimensional table of `x ↦ f(n x)`: supported on `nZ` with values `f^(k/n)`.
    pub fn dilate(&self, n: u32, kmax: i64) -> Result<CoeffTable> {
        if self.dim != 1 || n == 0 {
            return Err(Error::Precondition("dilate needs a 1-d table and n > 0".into()));
        }
        let n = n as i64;
        self.get1(kmax / n)?;
        let provenance = Provenance::Derived {
            from: Box::new(self.provenance.clone()),
            op: format!("dilate({n})"),
        };
        Ok(CoeffTable::from_fn(&[kmax], provenance, |k| {
            if k[0] % n == 0 {
                self.get1(k[0] / n).expect("range checked")
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// Maximum violation of `|f^(k)| <= f^(0) <= 1`, `f^(0) >= 0` (zero when valid).
    pub fn bound_violation(&self) -> f64 {
        let m = self.mean();
        let mut worst = (m - 1.0).max(-m).max(0.0);
        for c in &self.entries {
            worst = worst.max(c.norm() - m);
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_averaging_and_lookup() {
        let t = CoeffTable::from_fn(&[2], Provenance::ClosedForm, |k| Complex64::new(k[0] as f64, 1.0));
        assert_eq!(t.get1(0).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(t.get1(1).unwrap(), t.get1(-1).unwrap().conj());
        assert!(matches!(t.get1(3), Err(Error::OutOfTable { .. })));
    }

    #[test]
    fn two_dimensional_layout() {
        let t = CoeffTable::from_fn(&[1, 2], Provenance::ClosedForm, |k| {
            Complex64::new((10 * k[0] + k[1]) as f64, 0.0)
        });
        // the function is odd, so averaging with conj(c(-k)) keeps it unchanged only
        // for its even part; here that is zero everywhere
        assert_eq!(t.get(&[1, -2]).unwrap(), Complex64::new(0.0, 0.0));
        let t = CoeffTable::from_fn(&[1, 2], Provenance::ClosedForm, |k| {
            Complex64::new((10 * k[0] * k[0] + k[1] * k[1]) as f64, 0.0)
        });
        assert_eq!(t.get(&[1, -2]).unwrap().re, 14.0);
        assert_eq!(t.iter().count(), 15);
    }

    #[test]
    fn constant_subsample_is_identity() {
        let t = CoeffTable::constant(0.3, &[8]);
        let s = t.subsample(&[3]).unwrap();
        assert_eq!(s.kmax, vec![2]);
        for k in -2..=2 {
            assert_eq!(s.get1(k).unwrap(), t.get1(k).unwrap());
        }
    }
}
