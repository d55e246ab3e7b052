//! Determinantal computations from a coefficient table.
//!
//! With sites `s_1, ..., s_n` the correlation kernel is
//! `K[i][j] = f^(s_j - s_i)`. The probability of ones on `A` and zeros on
//! `B` is `det M` with `M[e][e'] = 1_B(e) δ + (-1)^{1_B(e)} K[e][e']`.

mod pmf;

pub use pmf::{joint_pmf, joint_pmf_from_kernel, Pmf, WINDOW_CAP};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::spectral::{CoeffTable, OuterSeries};

/// A lattice site of `Z^d`.
pub type Site = Vec<i64>;

/// Sites of `Z` as one-dimensional lattice vectors.
pub fn line(xs: impl IntoIterator<Item = i64>) -> Vec<Site> {
    xs.into_iter().map(|x| vec![x]).collect()
}

/// Ones on `ones`, zeros on `zeros`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CylinderEvent {
    pub ones: Vec<Site>,
    pub zeros: Vec<Site>,
}

impl CylinderEvent {
    pub fn new(ones: Vec<Site>, zeros: Vec<Site>) -> Result<CylinderEvent> {
        let ev = CylinderEvent { ones, zeros };
        ev.validate()?;
        Ok(ev)
    }

    /// One-dimensional shorthand.
    pub fn on_line(ones: &[i64], zeros: &[i64]) -> Result<CylinderEvent> {
        CylinderEvent::new(line(ones.iter().copied()), line(zeros.iter().copied()))
    }

    /// The event given by a bit pattern on a window.
    pub fn from_pattern(window: &[Site], bits: &[bool]) -> CylinderEvent {
        let mut ev = CylinderEvent::default();
        for (s, b) in window.iter().zip(bits) {
            if *b {
                ev.ones.push(s.clone());
            } else {
                ev.zeros.push(s.clone());
            }
        }
        ev
    }

    fn validate(&self) -> Result<()> {
        let mut all: Vec<&Site> = self.ones.iter().chain(&self.zeros).collect();
        let n = all.len();
        all.sort();
        all.dedup();
        if all.len() != n {
            return Err(Error::Precondition("cylinder sites must be pairwise distinct".into()));
        }
        Ok(())
    }

    pub fn with_one(&self, site: Site) -> CylinderEvent {
        let mut ev = self.clone();
        ev.ones.push(site);
        ev
    }

    /// The flipped event `ones <-> zeros`.
    pub fn flipped(&self) -> CylinderEvent {
        CylinderEvent {
            ones: self.zeros.clone(),
            zeros: self.ones.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.ones.len() + self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Slack below zero (and above one) tolerated before a determinant is rejected.
pub const DET_SLACK: f64 = 1e-10;
/// Relative size below which a conditioning event counts as degenerate.
pub const DEGENERACY: f64 = 1e-13;

/// Correlation kernel `K[i][j] = f^(s_j - s_i)` on a site list.
pub fn kernel_matrix(table: &CoeffTable, sites: &[Site]) -> Result<CMat> {
    let n = sites.len();
    let mut m = CMat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if sites[i].len() != table.dim || sites[j].len() != table.dim {
                return Err(Error::Precondition(format!(
                    "site dimension does not match table dimension {}",
                    table.dim
                )));
            }
            let diff: Vec<i64> = sites[j].iter().zip(&sites[i]).map(|(a, b)| a - b).collect();
            m.set(i, j, table.get(&diff)?);
        }
    }
    Ok(m)
}

/// The inclusion-exclusion matrix for a pattern over the rows of `k`.
///
/// `is_zero[i]` marks rows constrained to 0.
pub fn cylinder_matrix(k: &CMat, is_zero: &[bool]) -> CMat {
    let n = k.n;
    let mut m = k.clone();
    let rows = (0..n).filter(|&i| is_zero[i]);
    for i in rows {
        for j in 0..n {
            let v = -m.get(i, j);
            m.set(i, j, v);
        }
        let d = m.get(i, i) + Complex64::new(1.0, 0.0);
        m.set(i, i, d);
    }
    m
}

/// Determinant checked to be a probability: tiny negatives clamp to zero,
/// larger negatives are errors.
pub(crate) fn as_probability(det: Complex64) -> Result<f64> {
    let v = det.re;
    if v < -DET_SLACK {
        return Err(Error::NegativeDeterminant { value: v });
    }
    if v > 1.0 + DET_SLACK {
        return Err(Error::Consistency(format!("determinant {v} exceeds 1")));
    }
    Ok(v.clamp(0.0, 1.0))
}

/// Probability of the pattern `is_zero` (false = one) under kernel `k`.
pub fn cylinder_from_kernel(k: &CMat, is_zero: &[bool]) -> Result<f64> {
    as_probability(cylinder_matrix(k, is_zero).det())
}

/// `P[η = 1 on sites] = det[f^(s_j - s_i)]`.
pub fn prob_ones(table: &CoeffTable, sites: &[Site]) -> Result<f64> {
    let ev = CylinderEvent::new(sites.to_vec(), Vec::new())?;
    prob_cylinder(table, &ev)
}

/// `P[η = 1 on A, η = 0 on B]`.
pub fn prob_cylinder(table: &CoeffTable, ev: &CylinderEvent) -> Result<f64> {
    ev.validate()?;
    let sites: Vec<Site> = ev.ones.iter().chain(&ev.zeros).cloned().collect();
    let k = kernel_matrix(table, &sites)?;
    let is_zero: Vec<bool> = (0..sites.len()).map(|i| i >= ev.ones.len()).collect();
    cylinder_from_kernel(&k, &is_zero)
}

/// Whether `num/den` is numerically meaningful for a pattern probability
/// `den` computed from matrix `m`.
fn degenerate(den: f64, m: &CMat) -> bool {
    let scale: f64 = (0..m.n).map(|i| m.get(i, i).norm()).product();
    den <= f64::MIN_POSITIVE || den < DEGENERACY * scale.max(f64::MIN_POSITIVE)
}

/// Conditional probability of a one at `site` given `ev`, from kernel `k`
/// whose last row/column is the target site.
pub fn cond_from_kernel(k: &CMat, is_zero: &[bool]) -> Result<f64> {
    let n = k.n;
    let sub = CMat::from_fn(n - 1, |i, j| k.get(i, j));
    let den_m = cylinder_matrix(&sub, &is_zero[..n - 1]);
    let den = as_probability(den_m.det())?;
    if degenerate(den, &den_m) {
        return Err(Error::DegenerateConditioning { value: den });
    }
    let mut pattern = is_zero.to_vec();
    pattern[n - 1] = false;
    let num = cylinder_from_kernel(k, &pattern)?;
    Ok((num / den).clamp(0.0, 1.0))
}

/// `P[η_site = 1 | ev]`.
pub fn cond_prob(table: &CoeffTable, site: &Site, ev: &CylinderEvent) -> Result<f64> {
    let mut sites: Vec<Site> = ev.ones.iter().chain(&ev.zeros).cloned().collect();
    if sites.contains(site) {
        return Err(Error::Precondition("target site already in the conditioning event".into()));
    }
    ev.validate()?;
    sites.push(site.clone());
    let k = kernel_matrix(table, &sites)?;
    let mut is_zero: Vec<bool> = (0..sites.len()).map(|i| i >= ev.ones.len()).collect();
    is_zero[sites.len() - 1] = false;
    cond_from_kernel(&k, &is_zero)
}

/// Relative eigenvalue cutoff for the Gram pseudo-inverse.
pub const PINV_CUTOFF: f64 = 1e-12;

/// The Szegő infimum `min_u ∫ |1 - u|² f` over `u ∈ span{e_k : k ∈ B}`.
///
/// Equals `f^(0) - cᴴ G⁺ c` with `G[j][k] = f^(b_j - b_k)` and `c[k] = f^(b_k)`,
/// which is the conditional probability of a one at the origin given ones on `B`.
pub fn szego_inf(table: &CoeffTable, b: &[Site]) -> Result<f64> {
    let origin = vec![0i64; table.dim];
    if b.contains(&origin) {
        return Err(Error::Precondition("B must not contain the origin".into()));
    }
    let f0 = table.mean();
    if b.is_empty() {
        return Ok(f0);
    }
    let n = b.len();
    let mut g = CMat::zeros(n);
    for j in 0..n {
        for k in 0..n {
            let diff: Vec<i64> = b[j].iter().zip(&b[k]).map(|(x, y)| x - y).collect();
            g.set(j, k, table.get(&diff)?);
        }
    }
    let c: Vec<Complex64> = b.iter().map(|s| table.get(s)).collect::<Result<_>>()?;
    let q = g.pinv_quadratic_form(&c, PINV_CUTOFF);
    Ok((f0 - q).clamp(0.0, f0))
}

/// Kernel of `ν_f`, the limit of `P^f` on `{0, 1, ...}` conditioned on ones
/// at all negative sites: `Q(j, k) = Σ_{l <= min(j,k)} conj(φ^(j-l)) φ^(k-l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NuKernel {
    pub q: CMat,
}

impl NuKernel {
    /// Number of indices `m + 1`.
    pub fn size(&self) -> usize {
        self.q.n
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.q.hermitian_eigenvalues()
    }
}

pub fn nu_kernel(outer: &OuterSeries, m: usize) -> Result<NuKernel> {
    if outer.coeffs.len() < m + 1 {
        return Err(Error::Precondition(format!(
            "outer series has {} terms, need {}",
            outer.coeffs.len(),
            m + 1
        )));
    }
    let phi = &outer.coeffs;
    let q = CMat::from_fn(m + 1, |j, k| {
        (0..=j.min(k)).map(|l| phi[j - l].conj() * phi[k - l]).sum()
    });
    Ok(NuKernel { q })
}

/// `ν[η = 1 on A, η = 0 on B]` for index sets within `0..=m`.
pub fn nu_cylinder(kernel: &NuKernel, ev: &CylinderEvent) -> Result<f64> {
    ev.validate()?;
    let idx: Vec<usize> = ev
        .ones
        .iter()
        .chain(&ev.zeros)
        .map(|s| match s.as_slice() {
            [i] if *i >= 0 && (*i as usize) < kernel.size() => Ok(*i as usize),
            _ => Err(Error::Precondition(format!("ν index {s:?} outside 0..{}", kernel.size()))),
        })
        .collect::<Result<_>>()?;
    let k = CMat::from_fn(idx.len(), |i, j| kernel.q.get(idx[i], idx[j]));
    let is_zero: Vec<bool> = (0..idx.len()).map(|i| i >= ev.ones.len()).collect();
    cylinder_from_kernel(&k, &is_zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{fourier_coeffs, outer_coeffs, QuadParams};
    use crate::symbol::parse_symbol;

    fn table(text: &str, kmax: i64) -> CoeffTable {
        fourier_coeffs(&parse_symbol(text, 1).unwrap(), &[kmax], &QuadParams::default()).unwrap()
    }

    #[test]
    fn constant_products() {
        let t = table("0.3", 4);
        assert!((prob_ones(&t, &line([0, 1, 3])).unwrap() - 0.027).abs() < 1e-15);
        let ev = CylinderEvent::on_line(&[0], &[1, 2]).unwrap();
        assert!((prob_cylinder(&t, &ev).unwrap() - 0.3 * 0.49).abs() < 1e-15);
    }

    #[test]
    fn sin2_minors() {
        let t = table("sin2", 4);
        assert!((prob_ones(&t, &line([0, 1])).unwrap() - 3.0 / 16.0).abs() < 1e-15);
        assert!((prob_ones(&t, &line([0, 1, 2])).unwrap() - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn inclusion_exclusion_matches_brute_force() {
        let t = table("sin2", 4);
        let ev = CylinderEvent::on_line(&[0, 2], &[1]).unwrap();
        let brute = prob_ones(&t, &line([0, 2])).unwrap() - prob_ones(&t, &line([0, 1, 2])).unwrap();
        assert!((prob_cylinder(&t, &ev).unwrap() - brute).abs() < 1e-12);
        let ev = CylinderEvent::on_line(&[], &[0]).unwrap();
        assert!((prob_cylinder(&t, &ev).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn renewal_conditional() {
        let a: f64 = 0.5;
        let t = table("renewal(0.5)", 4);
        let ev = CylinderEvent::on_line(&[-1], &[]).unwrap();
        let p = cond_prob(&t, &vec![0], &ev).unwrap();
        assert!((p - (1.0 - a) / (1.0 + a) * (1.0 - a * a)).abs() < 1e-14);
    }

    #[test]
    fn degenerate_conditioning_is_reported() {
        let t = table("0", 2);
        let ev = CylinderEvent::on_line(&[-1], &[]).unwrap();
        assert!(matches!(
            cond_prob(&t, &vec![0], &ev),
            Err(Error::DegenerateConditioning { .. })
        ));
    }

    #[test]
    fn szego_inf_matches_schur_complement() {
        for text in ["sin2", "sin2half", "renewal(0.5)", "arc(0,0.5)"] {
            let t = table(text, 8);
            let b = line(-6..=-1);
            let ev = CylinderEvent::new(b.clone(), vec![]).unwrap();
            let direct = cond_prob(&t, &vec![0], &ev);
            let s = szego_inf(&t, &b).unwrap();
            if let Ok(d) = direct {
                assert!((d - s).abs() < 1e-9, "{text}: {d} vs {s}");
            }
        }
        let t = table("renewal(0.5)", 2);
        let one = t.get1(1).unwrap().norm_sqr();
        let expect = t.mean() - one / t.mean();
        assert!((szego_inf(&t, &line([-1])).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn nu_kernel_of_sin2() {
        let o = outer_coeffs(&parse_symbol("sin2", 1).unwrap(), 4, &QuadParams::default()).unwrap();
        let nu = nu_kernel(&o, 3).unwrap();
        assert!((nu.q.get(0, 0).re - 0.25).abs() < 1e-12);
        assert!((nu.q.get(1, 1).re - 0.5).abs() < 1e-12);
        assert!((nu.q.get(0, 1).re + 0.25).abs() < 1e-12);
        let ev = CylinderEvent::on_line(&[0], &[]).unwrap();
        assert!((nu_cylinder(&nu, &ev).unwrap() - 0.25).abs() < 1e-12);
    }
}
