use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::quad::{self, QuadParams};
use crate::error::Result;
use crate::symbol::{Builtin, Expr, SymbolSpec};

/// A mean together with its error estimate and divergence status.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanValue {
    pub value: f64,
    /// Estimated absolute error (zero for closed forms).
    pub error: f64,
    /// The defining integral diverges, so the mean is zero.
    pub divergent: bool,
    /// Divergence is known analytically rather than inferred numerically.
    pub provable: bool,
}

impl MeanValue {
    pub fn exact(value: f64) -> MeanValue {
        MeanValue {
            value,
            error: 0.0,
            divergent: false,
            provable: false,
        }
    }

    pub fn zero(provable: bool) -> MeanValue {
        MeanValue {
            value: 0.0,
            error: 0.0,
            divergent: true,
            provable,
        }
    }

    /// Strictly positive and not flagged divergent.
    pub fn is_positive(&self) -> bool {
        !self.divergent && self.value > 0.0
    }
}

/// Arithmetic, geometric and harmonic means of `f` and `1 - f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeansReport {
    pub symbol: String,
    pub am: MeanValue,
    pub gm: MeanValue,
    pub hm: MeanValue,
    pub gm_complement: MeanValue,
    pub hm_complement: MeanValue,
    pub method: String,
}

impl MeansReport {
    /// The report for `1 - f`.
    pub fn complemented(&self) -> MeansReport {
        MeansReport {
            symbol: format!("1 - ({})", self.symbol),
            am: MeanValue {
                value: 1.0 - self.am.value,
                ..self.am
            },
            gm: self.gm_complement,
            hm: self.hm_complement,
            gm_complement: self.gm,
            hm_complement: self.hm,
            method: self.method.clone(),
        }
    }
}

/// Integrals below this (for `log f`) or above `HM_DIVERGENCE` (for `1/f`),
/// still moving outward, are treated as divergent.
pub const GM_DIVERGENCE: f64 = -40.0;
pub const HM_DIVERGENCE: f64 = 1e16;

/// Arithmetic, geometric and harmonic means of `f` and `1-f`.
///
/// Divergent integrals are flagged rather than reported as errors. Besides
/// the absolute thresholds [`GM_DIVERGENCE`] and [`HM_DIVERGENCE`], a
/// quadrature sequence whose refinements keep moving outward without
/// shrinking (successive changes of one sign, each at least 0.9 times the
/// previous) is flagged as divergent.
pub fn means(spec: &SymbolSpec, quad: &QuadParams) -> Result<MeansReport> {
    let symbol = spec.label();
    if quad.closed_form {
        if let Some(mut r) = exact_means(spec)? {
            r.symbol = symbol;
            return Ok(r);
        }
    }
    let mut r = if spec.dim >= 3 {
        monte_carlo_means(spec, quad)?
    } else {
        quadrature_means(spec, quad)?
    };
    r.symbol = symbol;
    Ok(r)
}

fn from_closed(am: f64, gm: f64, hm: f64, gmc: f64, hmc: f64) -> MeansReport {
    let m = |v: f64| {
        if v == 0.0 {
            MeanValue::zero(true)
        } else {
            MeanValue::exact(v)
        }
    };
    MeansReport {
        symbol: String::new(),
        am: MeanValue::exact(am),
        gm: m(gm),
        hm: m(hm),
        gm_complement: m(gmc),
        hm_complement: m(hmc),
        method: "closed-form".into(),
    }
}

fn exact_means(spec: &SymbolSpec) -> Result<Option<MeansReport>> {
    if spec.expr.arity() == 0 {
        let p = spec.eval_reduced(&vec![0.0; spec.dim])?;
        return Ok(Some(from_closed(p, p, p, 1.0 - p, 1.0 - p)));
    }
    let am_of = |b: &Builtin| -> Option<f64> {
        match b {
            Builtin::Ust2d | Builtin::UstAxisG => Some(0.5),
            Builtin::UstD(d) => Some(1.0 / *d as f64),
            other => other.coeff(0).map(|c| c.re),
        }
    };
    if let Some(b) = spec.as_builtin() {
        if let (Some(am), Some((gm, hm)), Some((gmc, hmc))) =
            (am_of(b), b.closed_means(), b.closed_means_complement())
        {
            return Ok(Some(from_closed(am, gm, hm, gmc, hmc)));
        }
    }
    if let Some(b) = spec.as_complement_of_builtin() {
        if let (Some(am), Some((gm, hm)), Some((gmc, hmc))) =
            (am_of(b), b.closed_means(), b.closed_means_complement())
        {
            return Ok(Some(from_closed(1.0 - am, gmc, hmc, gm, hm)));
        }
    }
    if let Some(step) = spec.as_step() {
        let pieces = step.pieces();
        let len = |p: &crate::symbol::step::Piece| p.end - p.start;
        let am: f64 = pieces.iter().map(|p| len(p) * p.value).sum();
        let gm_hm = |vals: &mut dyn Iterator<Item = (f64, f64)>| {
            let v: Vec<(f64, f64)> = vals.collect();
            if v.iter().any(|(_, x)| *x <= 0.0) {
                (0.0, 0.0)
            } else {
                let lg: f64 = v.iter().map(|(l, x)| l * x.ln()).sum();
                let inv: f64 = v.iter().map(|(l, x)| l / x).sum();
                (lg.exp(), 1.0 / inv)
            }
        };
        let (gm, hm) = gm_hm(&mut pieces.iter().map(|p| (len(p), p.value)));
        let (gmc, hmc) = gm_hm(&mut pieces.iter().map(|p| (len(p), 1.0 - p.value)));
        return Ok(Some(from_closed(am, gm, hm, gmc, hmc)));
    }
    if let Expr::Dilate { inner, .. } = &spec.expr {
        // x -> f(nx) is measure preserving
        let inner = SymbolSpec::from_expr((**inner).clone(), spec.dim);
        return exact_means(&inner);
    }
    Ok(None)
}

/// Indices of the five functionals tracked by quadrature.
const AM: usize = 0;
const LOG: usize = 1;
const INV: usize = 2;
const LOG_C: usize = 3;
const INV_C: usize = 4;

fn functionals(f: f64) -> [f64; 5] {
    let c = 1.0 - f;
    [f, f.ln(), 1.0 / f, c.ln(), 1.0 / c]
}

/// Divergence test on the unextrapolated integral estimates of one functional.
///
/// `outward` is the direction of divergence: -1 for `∫ log`, +1 for `∫ 1/f`.
pub(crate) fn looks_divergent(raw: &[f64], outward: f64, threshold: f64) -> bool {
    let last = match raw.last() {
        Some(v) => *v,
        None => return false,
    };
    if !last.is_finite() {
        return true;
    }
    let n = raw.len();
    if n >= 2 {
        let moving_out = (raw[n - 1] - raw[n - 2]) * outward > 0.0;
        if moving_out && (last - threshold) * outward > 0.0 {
            return true;
        }
    }
    if n < 4 {
        return false;
    }
    let d: Vec<f64> = raw[n - 4..].windows(2).map(|w| (w[1] - w[0]) * outward).collect();
    d.iter().all(|v| *v > 0.0) && d[1] >= 0.9 * d[0] && d[2] >= 0.9 * d[1]
}

fn quadrature_means(spec: &SymbolSpec, quad: &QuadParams) -> Result<MeansReport> {
    let d = spec.dim;
    let tol = quad.tol_for(d);
    let max_level = quad.max_level_for(d);
    let min_level = if d == 1 { 6 } else { 4 };
    let mut tableau = quad::Tableau::default();
    let mut settled = [false; 5];
    let mut diverged = [false; 5];
    let mut level = min_level;
    loop {
        let n = 1usize << level;
        let values = quad::grid_values(spec, n, |f| f)?;
        let mut sums = [0.0f64; 5];
        for (i, s) in sums.iter_mut().enumerate() {
            let v: Vec<f64> = values.iter().map(|&f| functionals(f)[i]).collect();
            *s = quad::grid_sum(&v) / v.len() as f64;
        }
        tableau.push(sums.iter().map(|&s| Complex64::new(s, 0.0)).collect());
        let best = tableau.best().to_vec();
        for i in 0..5 {
            let raw: Vec<f64> = tableau.raw_entry(i).iter().map(|c| c.re).collect();
            let outward = if i == LOG || i == LOG_C { -1.0 } else { 1.0 };
            let threshold = if outward < 0.0 { GM_DIVERGENCE } else { HM_DIVERGENCE };
            if i != AM && looks_divergent(&raw, outward, threshold) {
                diverged[i] = true;
            }
            if tableau.levels() >= 3 {
                settled[i] = entry_delta(&tableau, i) < tol || !best[i].re.is_finite();
            }
        }
        let done = (0..5).all(|i| settled[i] || diverged[i]);
        if done || level >= max_level {
            break;
        }
        level += 1;
    }
    let best = tableau.best().to_vec();
    let mean = |i: usize, map: fn(f64) -> f64| -> MeanValue {
        if diverged[i] || !best[i].re.is_finite() {
            return MeanValue::zero(false);
        }
        let v = map(best[i].re);
        let err = entry_delta(&tableau, i) * derivative_scale(i, best[i].re);
        MeanValue {
            value: v,
            error: err,
            divergent: false,
            provable: false,
        }
    };
    let mut report = MeansReport {
        symbol: String::new(),
        am: mean(AM, |x| x),
        gm: mean(LOG, f64::exp),
        hm: mean(INV, |x| 1.0 / x),
        gm_complement: mean(LOG_C, f64::exp),
        hm_complement: mean(INV_C, |x| 1.0 / x),
        method: format!("quadrature(level={level})"),
    };
    apply_annotations(spec, &mut report);
    Ok(report)
}

fn entry_delta(t: &quad::Tableau, i: usize) -> f64 {
    let raw = t.raw_entry(i);
    if raw.len() < 2 {
        return f64::INFINITY;
    }
    // re-run the tableau on this entry alone to get its own delta
    let mut single = quad::Tableau::default();
    for v in raw {
        single.push(vec![v]);
    }
    single.delta()
}

/// Converts an error in the integral to an error in the derived mean.
fn derivative_scale(i: usize, integral: f64) -> f64 {
    match i {
        LOG | LOG_C => integral.exp(),
        INV | INV_C => 1.0 / (integral * integral),
        _ => 1.0,
    }
}

/// Builtins with analytically divergent harmonic means keep that flag even
/// when the numeric integral happens to look convergent.
fn apply_annotations(spec: &SymbolSpec, report: &mut MeansReport) {
    let (hm, hmc) = if let Some(b) = spec.as_builtin() {
        b.provable_hm_divergence()
    } else if let Some(b) = spec.as_complement_of_builtin() {
        let (a, c) = b.provable_hm_divergence();
        (c, a)
    } else {
        (false, false)
    };
    if hm {
        report.hm = MeanValue::zero(true);
    }
    if hmc {
        report.hm_complement = MeanValue::zero(true);
    }
}

fn monte_carlo_means(spec: &SymbolSpec, quad: &QuadParams) -> Result<MeansReport> {
    let stats = quad::monte_carlo(spec, quad.mc_points, quad.seed, |f, _| functionals(f).to_vec())?;
    let mean = |i: usize, map: fn(f64) -> f64| -> MeanValue {
        let (m, se) = stats[i];
        if !m.is_finite() {
            return MeanValue::zero(false);
        }
        MeanValue {
            value: map(m),
            error: se * derivative_scale(i, m),
            divergent: false,
            provable: false,
        }
    };
    let mut report = MeansReport {
        symbol: String::new(),
        am: mean(AM, |x| x),
        gm: mean(LOG, f64::exp),
        hm: mean(INV, |x| 1.0 / x),
        gm_complement: mean(LOG_C, f64::exp),
        hm_complement: mean(INV_C, |x| 1.0 / x),
        method: format!("monte-carlo(points={})", quad.mc_points),
    };
    apply_annotations(spec, &mut report);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{parse_symbol, CATALAN};
    use std::f64::consts::{PI, SQRT_2};

    #[test]
    fn sin2_quadrature_gm_is_quarter() {
        let s = parse_symbol("sin(pi*x)^2", 1).unwrap();
        let r = means(&s, &QuadParams::default()).unwrap();
        assert!((r.gm.value - 0.25).abs() < 1e-10, "{:?}", r.gm);
        assert!((r.gm_complement.value - 0.25).abs() < 1e-10);
        assert!(r.hm.divergent && r.hm_complement.divergent);
        assert!((r.am.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ust_axis_quadrature_matches_closed_forms() {
        let s = parse_symbol("ust_axis_g", 1).unwrap();
        let q = means(&s, &QuadParams::forced()).unwrap();
        let c = means(&s, &QuadParams::default()).unwrap();
        assert!((q.gm.value - (SQRT_2 - 1.0)).abs() < 1e-8, "{:?}", q.gm);
        assert!((q.gm_complement.value - c.gm_complement.value).abs() < 1e-8);
        assert!((q.hm_complement.value - PI / (1.0 + 2.0 * PI)).abs() < 1e-8);
        assert!(q.hm.divergent);
    }

    #[test]
    fn arc_means_diverge() {
        let s = parse_symbol("arc(0,0.5)", 1).unwrap();
        let r = means(&s, &QuadParams::default()).unwrap();
        assert!(r.gm.divergent && r.hm.divergent && r.gm.value == 0.0);
        // the quadrature path sees log 0 and flags it too
        let q = means(&s, &QuadParams::forced()).unwrap();
        assert!(q.gm.divergent && q.hm.divergent);
    }

    #[test]
    fn renewal_harmonic_mean() {
        let s = parse_symbol("renewal(0.5)", 1).unwrap();
        let q = means(&s, &QuadParams::forced()).unwrap();
        assert!((q.hm.value - 0.25 / 1.25).abs() < 1e-10);
        assert!((q.gm.value - 0.25).abs() < 1e-10);
        assert!((q.gm_complement.value - 0.5).abs() < 1e-9, "{:?}", q.gm_complement);
        assert!(q.hm_complement.divergent);
    }

    #[test]
    fn closed_complement_gm_values() {
        for name in ["poly3", "zigzag", "sin2half"] {
            let s = parse_symbol(name, 1).unwrap();
            let c = means(&s, &QuadParams::default()).unwrap();
            let q = means(&s, &QuadParams::forced()).unwrap();
            assert!((c.gm.value - q.gm.value).abs() < 1e-8, "{name}");
            assert!((c.gm_complement.value - q.gm_complement.value).abs() < 1e-8, "{name}");
        }
        let z = means(&parse_symbol("zigzag", 1).unwrap(), &QuadParams::default()).unwrap();
        assert!((z.gm.value - (-2.0 * CATALAN / PI).exp() / SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn divergence_detector() {
        // logarithmic growth of a harmonic integral
        let raw: Vec<f64> = (0..6).map(|m| 1.0 + m as f64 * 0.69).collect();
        assert!(looks_divergent(&raw, 1.0, HM_DIVERGENCE));
        // first-order convergence
        let raw: Vec<f64> = (0..6).map(|m| 1.0 + 0.5f64.powi(m)).collect();
        assert!(!looks_divergent(&raw, 1.0, HM_DIVERGENCE));
        assert!(looks_divergent(&[-1.0, f64::NEG_INFINITY], -1.0, GM_DIVERGENCE));
    }
}
