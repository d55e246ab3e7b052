//! Entropy bounds for `P^f`, in nats.

use std::f64::consts::LN_2;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{cond_from_kernel, joint_pmf, line, nu_kernel, Site, WINDOW_CAP};
use crate::spectral::quad::{self, QuadParams};
use crate::spectral::{fourier_coeffs, outer_coeffs, CoeffTable, MeansReport, OuterSeries};
use crate::symbol::{BinOp, Expr, Func, SymbolSpec};

/// `H[p] = -p log p - (1-p) log(1-p)`.
pub fn binary_entropy(p: f64) -> f64 {
    xlog_inv(p) + xlog_inv(1.0 - p)
}

/// `x log(1/x)`, zero at zero.
fn xlog_inv(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntropyMethod {
    Block,
    Refined,
    GmLower,
    Perturbation,
    RenewalExact,
}

/// Certified bounds `lo <= H(P^f) <= hi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyInterval {
    pub symbol: String,
    pub method: EntropyMethod,
    pub m: usize,
    pub lo: f64,
    pub hi: f64,
    pub pruned_mass: f64,
    /// Set when neither side carries information (both geometric means vanish).
    pub uninformative: bool,
    pub runtime_ms: u64,
}

impl EntropyInterval {
    pub fn contains(&self, h: f64) -> bool {
        self.lo <= h && h <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// The same interval in bits.
    pub fn in_bits(&self) -> EntropyInterval {
        EntropyInterval {
            lo: self.lo / LN_2,
            hi: self.hi / LN_2,
            ..self.clone()
        }
    }
}

/// `min{H[GM(f)], H[GM(1-f)]}`, a lower bound for the entropy.
pub fn gm_lower_bound(report: &MeansReport) -> f64 {
    let side = |m: &crate::spectral::MeanValue| if m.divergent { 0.0 } else { m.value };
    binary_entropy(side(&report.gm)).min(binary_entropy(side(&report.gm_complement)))
}

/// Sites of a box `0..shape[0] × ...` in lexicographic order.
pub fn box_sites(shape: &[usize]) -> Vec<Site> {
    let mut sites: Vec<Site> = vec![vec![]];
    for &len in shape {
        sites = sites
            .into_iter()
            .flat_map(|s| {
                (0..len as i64).map(move |x| {
                    let mut t = s.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    sites
}

/// Conditional entropy of the lexicographically last site of a box given the
/// rest of the box: `H(box) - H(box minus last)`. In one dimension this is
/// `H_m - H_{m-1}`.
pub fn block_upper_bound(table: &CoeffTable, shape: &[usize]) -> Result<f64> {
    if shape.len() != table.dim || shape.contains(&0) {
        return Err(Error::Precondition(format!(
            "box shape {shape:?} does not fit dimension {}",
            table.dim
        )));
    }
    let sites = box_sites(shape);
    if sites.len() > WINDOW_CAP {
        return Err(Error::WindowTooLarge {
            size: sites.len(),
            cap: WINDOW_CAP,
        });
    }
    let pmf = joint_pmf(table, &sites)?;
    let rest: Vec<usize> = (0..sites.len() - 1).collect();
    Ok((pmf.entropy() - pmf.marginal(&rest).entropy()).max(0.0))
}

/// Refined interval from a coefficient table (radius at least `m`) and the
/// outer series of `f` and `1 - f` (at least `m + 1` terms each).
///
/// Word `w` on positions `-m..-1` maps position `-m + i` to `ν`-index `i`;
/// the target site 0 is index `m`.
pub fn refined_from_parts(
    table: &CoeffTable,
    outer_f: &OuterSeries,
    outer_c: &OuterSeries,
    m: usize,
) -> Result<(f64, f64, f64, bool)> {
    if table.dim != 1 {
        return Err(Error::Precondition("refined bounds need a one-dimensional symbol".into()));
    }
    if m > WINDOW_CAP {
        return Err(Error::WindowTooLarge { size: m, cap: WINDOW_CAP });
    }
    let f_zero = outer_f.coeffs.iter().take(m + 1).all(|c| c.norm() == 0.0);
    let c_zero = outer_c.coeffs.iter().take(m + 1).all(|c| c.norm() == 0.0);
    if f_zero && c_zero {
        return Ok((0.0, LN_2, 0.0, true));
    }
    let nu_f = nu_kernel(outer_f, m)?;
    let nu_c = nu_kernel(outer_c, m)?;
    let pmf = joint_pmf(table, &line(-(m as i64)..0))?;

    let words: Vec<Result<(f64, f64, f64)>> = (0..1usize << m)
        .into_par_iter()
        .map(|idx| {
            let pw = pmf.probs[idx];
            if pw == 0.0 {
                return Ok((0.0, 0.0, 0.0));
            }
            let bit = |i: usize| idx >> i & 1 == 1;
            let lower = if f_zero {
                Ok(0.0)
            } else {
                let mut is_zero: Vec<bool> = (0..m).map(|i| !bit(i)).collect();
                is_zero.push(false);
                cond_from_kernel(&nu_f.q, &is_zero)
            };
            let upper = if c_zero {
                Ok(1.0)
            } else {
                let mut is_zero: Vec<bool> = (0..m).map(bit).collect();
                is_zero.push(false);
                cond_from_kernel(&nu_c.q, &is_zero).map(|v| 1.0 - v)
            };
            match (lower, upper) {
                (Ok(l), Ok(u)) => {
                    if u < l - 1e-9 {
                        return Err(Error::Consistency(format!(
                            "word {idx:b}: upper {u} below lower {l}"
                        )));
                    }
                    let (hl, hu) = (binary_entropy(l), binary_entropy(u));
                    let top = if l <= 0.5 && 0.5 <= u { LN_2 } else { hl.max(hu) };
                    Ok((pw * hl.min(hu), pw * top, 0.0))
                }
                (Err(Error::DegenerateConditioning { .. }), _)
                | (_, Err(Error::DegenerateConditioning { .. })) => Ok((0.0, pw * LN_2, pw)),
                (Err(e), _) | (_, Err(e)) => Err(e),
            }
        })
        .collect();
    let (mut lo, mut hi, mut pruned) = (0.0, 0.0, 0.0);
    for w in words {
        let (a, b, c) = w?;
        lo += a;
        hi += b;
        pruned += c;
    }
    Ok((lo.clamp(0.0, LN_2), hi.clamp(0.0, LN_2), pruned, false))
}

/// Interval for `H(P^f)` from `ν_f` and `ν_{1-f}` on words of length `m`.
pub fn refined_bounds(spec: &SymbolSpec, m: usize, quad: &QuadParams) -> Result<EntropyInterval> {
    let start = Instant::now();
    if spec.dim != 1 {
        return Err(Error::Precondition("refined bounds need a one-dimensional symbol".into()));
    }
    let table = fourier_coeffs(spec, &[m.max(1) as i64], quad)?;
    let outer_f = outer_coeffs(spec, m, quad)?;
    let outer_c = outer_coeffs(&spec.complement(), m, quad)?;
    let (lo, hi, pruned_mass, uninformative) = refined_from_parts(&table, &outer_f, &outer_c, m)?;
    Ok(EntropyInterval {
        symbol: spec.label(),
        method: EntropyMethod::Refined,
        m,
        lo,
        hi,
        pruned_mass,
        uninformative,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

/// Probability that the gap back to the previous 1 is `n`.
fn renewal_gap_weight(a: f64, n: u64) -> f64 {
    let nf = n as f64;
    (1.0 - a) * (nf - (nf - 1.0) * a) * a.powi(n as i32 - 1) / (1.0 + a)
}

/// Exact entropy of the renewal process with parameter `a`, summing the
/// series over the gap `N` until the remaining mass times `log 2` is below `tol`.
pub fn renewal_entropy(a: f64, tol: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidParameter {
            name: "a".into(),
            message: format!("renewal parameter {a} outside (0,1)"),
        });
    }
    let mut h = 0.0;
    for n in 1..=10_000_000u64 {
        let w = renewal_gap_weight(a, n);
        let nf = n as f64;
        let q = (1.0 - a).powi(2) * nf / (nf - (nf - 1.0) * a);
        h += w * binary_entropy(q);
        // Σ_{k>n} w_k = (1-a)/(1+a) a^n (n + 1 + 2a/(1-a))
        let tail = (1.0 - a) / (1.0 + a) * a.powi(n as i32) * (nf + 1.0 + 2.0 * a / (1.0 - a));
        if tail * LN_2 < tol {
            return Ok(h);
        }
    }
    Ok(h)
}

/// `∫|f - g|` with an error allowance.
pub fn l1_distance(f: &SymbolSpec, g: &SymbolSpec, quad: &QuadParams) -> Result<(f64, f64)> {
    if f.dim != g.dim {
        return Err(Error::Precondition(format!(
            "symbols of dimension {} and {} cannot be compared",
            f.dim, g.dim
        )));
    }
    if let (Some(sf), Some(sg)) = (f.as_step(), g.as_step()) {
        let mut cuts: Vec<f64> = sf
            .pieces()
            .iter()
            .chain(sg.pieces().iter())
            .flat_map(|p| [p.start, p.end])
            .chain([0.0, 1.0])
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let d = cuts
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                (w[1] - w[0]) * (sf.eval(mid).clamp(0.0, 1.0) - sg.eval(mid).clamp(0.0, 1.0)).abs()
            })
            .sum();
        return Ok((d, 0.0));
    }
    let diff = SymbolSpec::from_expr(
        Expr::Call(
            Func::Abs,
            Box::new(Expr::binary(BinOp::Sub, f.expr.clone(), g.expr.clone())),
        ),
        f.dim,
    );
    let d = f.dim;
    let min_level = if d == 1 { 6 } else { 4 };
    let r = quad::refine(min_level, quad.max_level_for(d), quad.tol_for(d), |level| {
        let values = quad::grid_values(&diff, 1usize << level, |v| v)?;
        Ok(vec![Complex64::new(quad::grid_sum(&values) / values.len() as f64, 0.0)])
    })?;
    let err = if r.converged { r.last_delta } else { r.last_delta.max(1e-6) };
    Ok((r.values[0].re.max(0.0), err))
}

/// Widens an interval for `P^g` into one for `P^f` by `H[∫|f-g|]`.
pub fn perturbation_transfer(
    interval_g: &EntropyInterval,
    f: &SymbolSpec,
    g: &SymbolSpec,
    quad: &QuadParams,
) -> Result<EntropyInterval> {
    let start = Instant::now();
    let (dist, err) = l1_distance(f, g, quad)?;
    let delta = dist + err;
    if delta >= 0.5 {
        return Err(Error::Precondition(format!(
            "L1 distance {delta} is not below 1/2"
        )));
    }
    let h = binary_entropy(delta);
    Ok(EntropyInterval {
        symbol: f.label(),
        method: EntropyMethod::Perturbation,
        m: interval_g.m,
        lo: (interval_g.lo - h).max(0.0),
        hi: (interval_g.hi + h).min(LN_2),
        pruned_mass: interval_g.pruned_mass,
        uninformative: interval_g.uninformative,
        runtime_ms: interval_g.runtime_ms + start.elapsed().as_millis() as u64,
    })
}

/// The two lower bounds `(a_p, b_p)` for a process squeezed between `μ_p`
/// and `μ_{1-p}`.
pub fn hoffman_bounds(p: f64) -> Result<(f64, f64)> {
    if !(p > 0.0 && p <= 0.5) {
        return Err(Error::InvalidParameter {
            name: "p".into(),
            message: format!("{p} outside (0, 1/2]"),
        });
    }
    let q = 1.0 - 2.0 * p;
    let a = xlog_inv(1.0 - p) - 0.5 * xlog_inv(q);
    let b = 2.0 * xlog_inv(1.0 - p) - xlog_inv(q) - q * LN_2;
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::means;
    use crate::symbol::parse_symbol;

    fn spec(t: &str) -> SymbolSpec {
        parse_symbol(t, 1).unwrap()
    }

    fn h(p: f64) -> f64 {
        binary_entropy(p)
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(h(0.0), 0.0);
        assert_eq!(h(1.0), 0.0);
        assert!((h(0.5) - LN_2).abs() < 1e-15);
        assert!((h(0.25) - 0.5623).abs() < 1e-4);
    }

    #[test]
    fn sin2_depth_two() {
        let iv = refined_bounds(&spec("sin2"), 2, &QuadParams::default()).unwrap();
        let lo = 3.0 / 8.0 * h(0.25) + 5.0 / 8.0 * h(11.0 / 28.0);
        let hi = 3.0 / 8.0 * h(7.0 / 20.0) + 5.0 / 8.0 * h(5.0 / 12.0);
        assert!((iv.lo - lo).abs() < 1e-9, "{} vs {lo}", iv.lo);
        assert!((iv.hi - hi).abs() < 1e-9, "{} vs {hi}", iv.hi);
    }

    #[test]
    fn constant_is_exact() {
        let iv = refined_bounds(&spec("0.3"), 4, &QuadParams::default()).unwrap();
        assert!((iv.lo - h(0.3)).abs() < 1e-12 && (iv.hi - h(0.3)).abs() < 1e-12);
        let t = fourier_coeffs(&spec("0.3"), &[6], &QuadParams::default()).unwrap();
        assert!((block_upper_bound(&t, &[5]).unwrap() - h(0.3)).abs() < 1e-12);
    }

    #[test]
    fn uninformative_when_both_sides_vanish() {
        let iv = refined_bounds(&spec("arc(0,0.5)"), 3, &QuadParams::default()).unwrap();
        assert!(iv.uninformative);
        assert_eq!((iv.lo, iv.hi), (0.0, LN_2));
    }

    #[test]
    fn renewal_series_matches_refined() {
        let a = 0.5;
        let exact = renewal_entropy(a, 1e-14).unwrap();
        let iv = refined_bounds(&spec("renewal(0.5)"), 10, &QuadParams::default()).unwrap();
        assert!(iv.lo - 1e-10 <= exact && exact <= iv.hi + 1e-10, "{exact} {iv:?}");
        let small: Vec<f64> = [0.1, 0.01, 0.001]
            .iter()
            .map(|&a| renewal_entropy(a, 1e-12).unwrap())
            .collect();
        assert!(small[0] > small[1] && small[1] > small[2] && small[2] < 0.02);
    }

    #[test]
    fn renewal_gap_law_sums_to_one() {
        let s: f64 = (1..2000).map(|n| renewal_gap_weight(0.5, n)).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hoffman_half() {
        let (a, b) = hoffman_bounds(0.5).unwrap();
        assert!((a - 0.5 * LN_2).abs() < 1e-15);
        assert!((b - LN_2).abs() < 1e-15);
        // at p = 1/4 only a_p is positive
        let (a, b) = hoffman_bounds(0.25).unwrap();
        assert!(a > 0.0 && b < 0.0 && a.max(b) > 0.0);
        let bs: Vec<f64> = (1..50).map(|i| hoffman_bounds(0.4 + 0.002 * i as f64).unwrap().1).collect();
        assert!(bs.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn gm_bound_of_axis_tree_symbol() {
        let r = means(&spec("ust_axis_g"), &QuadParams::default()).unwrap();
        assert!(gm_lower_bound(&r) >= 0.67835);
    }

    #[test]
    fn l1_of_steps_is_exact() {
        let (d, e) = l1_distance(
            &spec("arc(0,0.5)"),
            &spec("0.98*arc(0,0.5)+0.01"),
            &QuadParams::default(),
        )
        .unwrap();
        assert!((d - 0.01).abs() < 1e-15 && e == 0.0);
    }
}
