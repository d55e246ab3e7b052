//! Domination constants, phase-uniqueness verdicts, and regeneration checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{cond_prob, joint_pmf, line, prob_cylinder, szego_inf, CylinderEvent, Site};
use crate::spectral::{fourier_coeffs, CoeffTable, MeanValue, MeansReport, OuterSeries, QuadParams};
use crate::symbol::{SymbolSpec, VanishingOrder, ZeroLocation};

/// A mean together with how its value was decided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constant {
    pub value: f64,
    /// The defining integral diverges (value forced to 0 or 1).
    pub degenerate: bool,
    /// The divergence is known analytically.
    pub provable: bool,
}

impl Constant {
    fn of(m: &MeanValue, complement: bool) -> Constant {
        let v = if m.divergent { 0.0 } else { m.value };
        Constant {
            value: if complement { 1.0 - v } else { v },
            degenerate: m.divergent,
            provable: m.provable,
        }
    }
}

/// `μ_p ≼ P^f ≼ μ_q` strongly for `p <= p_strong`, `q >= q_strong`, and
/// fully for `p <= p_full`, `q >= q_full`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub symbol: String,
    pub p_strong: Constant,
    pub q_strong: Constant,
    pub p_full: Constant,
    pub q_full: Constant,
}

pub fn domination_report(report: &MeansReport) -> DominationReport {
    DominationReport {
        symbol: report.symbol.clone(),
        p_strong: Constant::of(&report.gm, false),
        q_strong: Constant::of(&report.gm_complement, true),
        p_full: Constant::of(&report.hm, false),
        q_full: Constant::of(&report.hm_complement, true),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongK {
    pub verdict: Verdict,
    pub gm: f64,
    pub gm_complement: f64,
    /// Either geometric mean was declared zero by the numeric divergence
    /// test rather than analytically.
    pub numeric_only: bool,
}

/// Strong K holds iff `GM(f) GM(1-f) > 0`.
pub fn strong_k(report: &MeansReport) -> StrongK {
    let (a, b) = (&report.gm, &report.gm_complement);
    let yes = a.is_positive() && b.is_positive();
    StrongK {
        verdict: if yes { Verdict::Yes } else { Verdict::No },
        gm: if a.divergent { 0.0 } else { a.value },
        gm_complement: if b.divergent { 0.0 } else { b.value },
        numeric_only: (a.divergent && !a.provable) || (b.divergent && !b.provable),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Justification {
    NoZeros,
    FiniteOrderZerosD1,
    PositiveMeasureZeroSet,
    FlatZero,
    AlgebraicVarietyD2,
    NonAlgebraicCurveD2,
    NoProfile,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongFullK {
    pub verdict: Verdict,
    pub justification: Justification,
}

/// Decision table over the declared zero profile.
pub fn strong_full_k(spec: &SymbolSpec) -> StrongFullK {
    let out = |verdict, justification| StrongFullK {
        verdict,
        justification,
    };
    let Some(profile) = &spec.zero_profile else {
        return out(Verdict::Unknown, Justification::NoProfile);
    };
    if profile.entries.is_empty() {
        return out(Verdict::Yes, Justification::NoZeros);
    }
    let entries = &profile.entries;
    if entries.iter().any(|e| e.location == ZeroLocation::PositiveMeasure) {
        return out(Verdict::No, Justification::PositiveMeasureZeroSet);
    }
    if entries.iter().any(|e| e.order == VanishingOrder::Flat) {
        return out(Verdict::No, Justification::FlatZero);
    }
    match spec.dim {
        1 if entries.iter().all(|e| e.location == ZeroLocation::IsolatedPoint) => {
            out(Verdict::Yes, Justification::FiniteOrderZerosD1)
        }
        2 if entries.iter().any(|e| e.location == ZeroLocation::NonAlgebraicCurve) => {
            out(Verdict::No, Justification::NonAlgebraicCurveD2)
        }
        2 => out(Verdict::Yes, Justification::AlgebraicVarietyD2),
        _ => out(Verdict::Unknown, Justification::Undecided),
    }
}

/// `Σ_{l<=N} |φ^(l)|²`.
pub fn one_sided_mass(outer: &OuterSeries, n: usize) -> Result<f64> {
    if n >= outer.n_terms() {
        return Err(Error::Precondition(format!(
            "N = {n} but the outer series has {} terms",
            outer.n_terms()
        )));
    }
    Ok(outer.partial_mass(n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseVerdict {
    pub symbol: String,
    pub strong_k: StrongK,
    pub strong_full_k: StrongFullK,
    pub n: usize,
    pub one_sided_plus_mass: f64,
    pub one_sided_minus_mass: f64,
}

/// Assembles the verdict from the means and the outer series of `f` and `1 - f`.
pub fn phase_verdict(
    spec: &SymbolSpec,
    report: &MeansReport,
    outer_f: &OuterSeries,
    outer_c: &OuterSeries,
    n: usize,
) -> Result<PhaseVerdict> {
    Ok(PhaseVerdict {
        symbol: spec.label(),
        strong_k: strong_k(report),
        strong_full_k: strong_full_k(spec),
        n,
        one_sided_plus_mass: one_sided_mass(outer_f, n)?,
        one_sided_minus_mass: one_sided_mass(outer_c, n)?,
    })
}

/// Sites `k` with `n <= max_i |k_i| <= big_n`.
pub fn annulus(dim: usize, n: i64, big_n: i64) -> Vec<Site> {
    let mut sites: Vec<Site> = vec![vec![]];
    for _ in 0..dim {
        sites = sites
            .into_iter()
            .flat_map(|s| {
                (-big_n..=big_n).map(move |x| {
                    let mut t = s.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    sites.retain(|s| {
        let r = s.iter().map(|x| x.abs()).max().unwrap_or(0);
        n <= r && r <= big_n
    });
    sites
}

/// Probability of a 1 at the origin given 1s on the annulus `n <= |k| <= N`.
///
/// The table radius must reach `2N` (Gram entries are differences of annulus sites).
pub fn annulus_probe(table: &CoeffTable, n: i64, big_n: i64) -> Result<f64> {
    if !(0 < n && n <= big_n) {
        return Err(Error::Precondition(format!("need 0 < n <= N, got n = {n}, N = {big_n}")));
    }
    if table.kmax.iter().any(|&k| k < 2 * big_n) {
        return Err(Error::OutOfTable {
            k: vec![2 * big_n; table.dim],
            kmax: table.kmax.clone(),
        });
    }
    szego_inf(table, &annulus(table.dim, n, big_n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegenReport {
    pub run_length: usize,
    pub half_width: usize,
    pub max_residual: f64,
    /// Past patterns skipped because `P[R, a]` was numerically zero.
    pub pruned: usize,
}

/// Largest `|P[b | R, a] - P[b | R]|` over past patterns `a` on `-h..-1`
/// and future patterns `b` on `n..n+h-1`, with `R` = ones on `0..n-1`.
pub fn regeneration_test(table: &CoeffTable, n: usize, h: usize) -> Result<RegenReport> {
    if table.dim != 1 {
        return Err(Error::Precondition("regeneration test is one-dimensional".into()));
    }
    if h == 0 || h > 6 {
        return Err(Error::Precondition(format!("half width {h} outside 1..=6")));
    }
    let (hi, ni) = (h as i64, n as i64);
    // window: past, run, future
    let window = line((-hi..0).chain(0..ni).chain(ni..ni + hi));
    let pmf = joint_pmf(table, &window)?;
    let past = |idx: usize| idx & ((1 << h) - 1);
    let run = |idx: usize| (idx >> h) & ((1 << n) - 1);
    let future = |idx: usize| idx >> (h + n);
    let full_run = (1usize << n) - 1;

    let mut joint = vec![vec![0.0; 1 << h]; 1 << h];
    for (idx, p) in pmf.probs.iter().enumerate() {
        if run(idx) == full_run {
            joint[past(idx)][future(idx)] += p;
        }
    }
    let p_r: f64 = joint.iter().flatten().sum();
    if p_r <= 1e-300 {
        return Err(Error::DegenerateConditioning { value: p_r });
    }
    let marginal: Vec<f64> = (0..1 << h)
        .map(|b| joint.iter().map(|row| row[b]).sum::<f64>() / p_r)
        .collect();
    let mut worst: f64 = 0.0;
    let mut pruned = 0;
    for row in &joint {
        let p_ra: f64 = row.iter().sum();
        if p_ra < 1e-13 * p_r {
            pruned += 1;
            continue;
        }
        for (b, v) in row.iter().enumerate() {
            worst = worst.max((v / p_ra - marginal[b]).abs());
        }
    }
    Ok(RegenReport {
        run_length: n,
        half_width: h,
        max_residual: worst,
        pruned,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewalCheck {
    pub name: String,
    pub max_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewalReport {
    pub a: f64,
    pub checks: Vec<RenewalCheck>,
}

impl RenewalReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Tolerance for every renewal identity.
pub const RENEWAL_TOL: f64 = 1e-9;
const RENEWAL_DEPTH: usize = 8;

/// Numeric checks of the renewal description of `P^f`, `f = (1-a)²/|e(x) - a|²`:
/// quadrature coefficients against the closed form, the interrenewal law,
/// the conditional one-probabilities, and the convolution identity linking them.
pub fn renewal_checks(a: f64) -> Result<RenewalReport> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidParameter {
            name: "a".into(),
            message: format!("{a} outside (0,1)"),
        });
    }
    let spec = SymbolSpec::builtin(crate::symbol::Builtin::Renewal(a));
    let depth = RENEWAL_DEPTH as i64;
    let c = (1.0 - a) / (1.0 + a);
    let check = |name: &str, err: f64| RenewalCheck {
        name: name.into(),
        max_error: err,
        pass: err <= RENEWAL_TOL,
    };

    let quad = fourier_coeffs(&spec, &[2 * depth + 2], &QuadParams::forced())?;
    let coeff_err = (-2 * depth - 2..=2 * depth + 2)
        .map(|k| (quad.get1(k).unwrap() - c * a.powi(k.abs() as i32)).norm())
        .fold(0.0, f64::max);

    let table = fourier_coeffs(&spec, &[2 * depth + 2], &QuadParams::default())?;
    let given_one = CylinderEvent::on_line(&[0], &[])?;
    let p0 = prob_cylinder(&table, &given_one)?;
    let mut gaps = [0.0; RENEWAL_DEPTH + 2];
    let mut gap_err: f64 = 0.0;
    for n in 1..=depth + 1 {
        let zeros: Vec<i64> = (1..n).collect();
        let ev = CylinderEvent::on_line(&[0, n], &zeros)?;
        let q = prob_cylinder(&table, &ev)? / p0;
        gaps[n as usize] = q;
        if n <= depth {
            gap_err = gap_err.max((q - n as f64 * (1.0 - a).powi(2) * a.powi(n as i32 - 1)).abs());
        }
    }

    let before = CylinderEvent::on_line(&[-1], &[])?;
    let mut cond = [0.0; RENEWAL_DEPTH + 1];
    let mut cond_err: f64 = 0.0;
    for j in 0..=depth {
        let v = cond_prob(&table, &vec![j], &before)?;
        cond[j as usize] = v;
        cond_err = cond_err.max((v - c * (1.0 - a.powi(2 * j as i32 + 2))).abs());
    }

    // c_j = q_{j+1} + Σ_{k=1}^{j} q_k c_{j-k}
    let conv_err = (0..=RENEWAL_DEPTH)
        .map(|j| {
            let rhs = gaps[j + 1] + (1..=j).map(|k| gaps[k] * cond[j - k]).sum::<f64>();
            (cond[j] - rhs).abs()
        })
        .fold(0.0, f64::max);

    Ok(RenewalReport {
        a,
        checks: vec![
            check("coefficients", coeff_err),
            check("interrenewal-law", gap_err),
            check("conditional-one", cond_err),
            check("convolution-identity", conv_err),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{means, outer_coeffs};
    use crate::symbol::parse_symbol;

    fn spec(t: &str) -> SymbolSpec {
        parse_symbol(t, 1).unwrap()
    }

    #[test]
    fn axis_tree_domination() {
        let r = means(&spec("ust_axis_g"), &QuadParams::default()).unwrap();
        let d = domination_report(&r);
        assert!((d.p_strong.value - (2f64.sqrt() - 1.0)).abs() < 1e-8);
        assert!((d.q_strong.value - 0.5376).abs() < 1e-4);
        let pi = std::f64::consts::PI;
        assert!((d.q_full.value - (1.0 + pi) / (1.0 + 2.0 * pi)).abs() < 1e-8);
        assert_eq!(d.p_full.value, 0.0);
    }

    #[test]
    fn verdicts() {
        let q = QuadParams::default();
        let sin2 = spec("sin2");
        assert_eq!(strong_k(&means(&sin2, &q).unwrap()).verdict, Verdict::Yes);
        assert_eq!(strong_full_k(&sin2).verdict, Verdict::Yes);
        let arc = spec("arc(0,0.5)");
        assert_eq!(strong_k(&means(&arc, &q).unwrap()).verdict, Verdict::No);
        let half = spec("half_ind");
        assert_eq!(
            strong_full_k(&half),
            StrongFullK {
                verdict: Verdict::No,
                justification: Justification::PositiveMeasureZeroSet
            }
        );
        assert_eq!(strong_full_k(&arc).verdict, Verdict::Unknown);
    }

    #[test]
    fn sin2_one_sided_mass() {
        let o = outer_coeffs(&spec("sin2"), 4, &QuadParams::default()).unwrap();
        assert!((one_sided_mass(&o, 1).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn annulus_constant_and_sin2() {
        let t = fourier_coeffs(&spec("0.3"), &[20], &QuadParams::default()).unwrap();
        assert!((annulus_probe(&t, 2, 10).unwrap() - 0.3).abs() < 1e-12);
        let t = fourier_coeffs(&spec("sin2"), &[80], &QuadParams::default()).unwrap();
        assert!((annulus_probe(&t, 3, 40).unwrap() - 0.5).abs() < 0.05);
    }

    #[test]
    fn renewal_regenerates() {
        for a in [0.2, 0.5, 0.8] {
            let r = renewal_checks(a).unwrap();
            assert!(r.pass(), "{r:?}");
        }
        let t = fourier_coeffs(&spec("renewal(0.5)"), &[12], &QuadParams::default()).unwrap();
        assert!(regeneration_test(&t, 1, 3).unwrap().max_residual < 1e-9);
        let t = fourier_coeffs(&spec("renewal(0.5)"), &[12], &QuadParams::default()).unwrap();
        assert!(regeneration_test(&t, 0, 3).unwrap().max_residual > 0.01);
        let t = fourier_coeffs(&spec("0.4"), &[12], &QuadParams::default()).unwrap();
        assert!(regeneration_test(&t, 0, 3).unwrap().max_residual < 1e-12);
    }
}
