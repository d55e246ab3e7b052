//! Named symbols with closed-form Fourier data.
//!
//! Each builtin knows how to evaluate itself, which coordinates it reads, and
//! (where one exists) a closed form for its Fourier coefficients, for the
//! Fourier coefficients of `½ log f`, and for its arithmetic, geometric and
//! harmonic means. The closed forms double as regression targets for the
//! quadrature path.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::profile::{Side, VanishingOrder, ZeroEntry, ZeroLocation, ZeroProfile};
use crate::error::{Error, Result};

/// Catalan's constant `Σ (-1)^k / (2k+1)^2`.
pub const CATALAN: f64 = 0.915_965_594_177_219_015_054_603_514_932_384_110_774;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Builtin {
    /// Constant symbol `p`.
    Const(f64),
    /// `sin²(πx)`.
    Sin2,
    /// `sin²(πt/2)` for `t ∈ [0,1)`.
    Sin2Half,
    /// Indicator of `[0, 1/2)`.
    HalfInd,
    /// Indicator of `[1/3, 2/3)`.
    Lozenge,
    /// Horizontal edges of the planar uniform spanning tree.
    Ust2d,
    /// Edges parallel to the first axis of the uniform spanning forest in `d` dimensions.
    UstD(usize),
    /// Spanning-tree edges lying on the x-axis.
    UstAxisG,
    /// Spanning-tree edges along a zig-zag path.
    Zigzag,
    /// Renewal symbol `(1-a)^2 / |e^{2πix} - a|^2`.
    Renewal(f64),
    /// `1/T` with `T(x) = c0 + 2 Σ_k c_k cos(2πkx)`, `T >= 1`.
    RecipTrig(Vec<f64>),
    /// `|1 + e^{2πix} + e^{4πix}|^2 / 9`.
    Poly3,
}

impl Builtin {
    pub const NAMES: &'static [&'static str] = &[
        "const",
        "sin2",
        "sin2half",
        "half_ind",
        "lozenge",
        "ust2d",
        "ustd",
        "ust_axis_g",
        "zigzag",
        "renewal",
        "recip_trig",
        "poly3",
    ];

    pub fn is_builtin_name(name: &str) -> bool {
        Self::NAMES.contains(&name)
    }

    /// Builds a builtin from its name and numeric arguments, validating parameters.
    pub fn from_call(name: &str, args: &[f64]) -> Result<Builtin> {
        let arity = |expected: &str, ok: bool| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::Arity {
                    name: name.to_string(),
                    expected: expected.to_string(),
                    got: args.len(),
                })
            }
        };
        let invalid = |message: String| Error::InvalidParameter {
            name: name.to_string(),
            message,
        };
        let b = match name {
            "const" => {
                arity("1", args.len() == 1)?;
                let p = args[0];
                if !(0.0..=1.0).contains(&p) {
                    return Err(invalid(format!("p = {p} must lie in [0,1]")));
                }
                Builtin::Const(p)
            }
            "sin2" | "sin2half" | "half_ind" | "lozenge" | "ust2d" | "ust_axis_g" | "zigzag"
            | "poly3" => {
                arity("0", args.is_empty())?;
                match name {
                    "sin2" => Builtin::Sin2,
                    "sin2half" => Builtin::Sin2Half,
                    "half_ind" => Builtin::HalfInd,
                    "lozenge" => Builtin::Lozenge,
                    "ust2d" => Builtin::Ust2d,
                    "ust_axis_g" => Builtin::UstAxisG,
                    "zigzag" => Builtin::Zigzag,
                    _ => Builtin::Poly3,
                }
            }
            "ustd" => {
                arity("1", args.len() == 1)?;
                let d = args[0];
                if d.fract() != 0.0 || !(2.0..=8.0).contains(&d) {
                    return Err(invalid(format!("dimension {d} must be an integer in 2..=8")));
                }
                Builtin::UstD(d as usize)
            }
            "renewal" => {
                arity("1", args.len() == 1)?;
                let a = args[0];
                if !(a > 0.0 && a < 1.0) {
                    return Err(invalid(format!("a = {a} must lie in (0,1)")));
                }
                Builtin::Renewal(a)
            }
            "recip_trig" => {
                arity(">= 1", !args.is_empty())?;
                let b = Builtin::RecipTrig(args.to_vec());
                let min_t = b.trig_min();
                if min_t < 1.0 - 1e-9 {
                    return Err(invalid(format!(
                        "trigonometric polynomial must be >= 1 (minimum found {min_t})"
                    )));
                }
                b
            }
            other => {
                return Err(Error::UnknownIdentifier {
                    name: other.to_string(),
                    offset: 0,
                })
            }
        };
        Ok(b)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Const(_) => "const",
            Builtin::Sin2 => "sin2",
            Builtin::Sin2Half => "sin2half",
            Builtin::HalfInd => "half_ind",
            Builtin::Lozenge => "lozenge",
            Builtin::Ust2d => "ust2d",
            Builtin::UstD(_) => "ustd",
            Builtin::UstAxisG => "ust_axis_g",
            Builtin::Zigzag => "zigzag",
            Builtin::Renewal(_) => "renewal",
            Builtin::RecipTrig(_) => "recip_trig",
            Builtin::Poly3 => "poly3",
        }
    }

    /// Number of leading coordinates the builtin reads.
    pub fn dim(&self) -> usize {
        match self {
            Builtin::Ust2d => 2,
            Builtin::UstD(d) => *d,
            _ => 1,
        }
    }

    fn trig_value(c: &[f64], x: f64) -> f64 {
        c[0] + c[1..]
            .iter()
            .enumerate()
            .map(|(k, ck)| 2.0 * ck * (2.0 * PI * (k + 1) as f64 * x).cos())
            .sum::<f64>()
    }

    fn trig_min(&self) -> f64 {
        match self {
            Builtin::RecipTrig(c) => (0..8192)
                .map(|j| Self::trig_value(c, j as f64 / 8192.0))
                .fold(f64::INFINITY, f64::min),
            _ => f64::NAN,
        }
    }

    /// Evaluates at a point whose coordinates are already reduced to `[0,1)`.
    /// Returns `None` at a genuine singularity.
    pub fn eval(&self, x: &[f64]) -> Option<f64> {
        let s2 = |t: f64| {
            let s = (PI * t).sin();
            s * s
        };
        let v = match self {
            Builtin::Const(p) => *p,
            Builtin::Sin2 => s2(x[0]),
            Builtin::Sin2Half => {
                let s = (0.5 * PI * x[0]).sin();
                s * s
            }
            Builtin::HalfInd => arc_indicator(0.0, 0.5, x[0]),
            Builtin::Lozenge => arc_indicator(1.0 / 3.0, 2.0 / 3.0, x[0]),
            Builtin::Ust2d => {
                let (a, b) = (s2(x[0]), s2(x[1]));
                if a + b == 0.0 {
                    return None;
                }
                a / (a + b)
            }
            Builtin::UstD(d) => {
                let a = s2(x[0]);
                let total: f64 = x[..*d].iter().map(|&t| s2(t)).sum();
                if total == 0.0 {
                    return None;
                }
                a / total
            }
            Builtin::UstAxisG => {
                let s = (PI * x[0]).sin().abs();
                s / (1.0 + s * s).sqrt()
            }
            // (|sin 2πx| - 1)/(2 cos 2πx) rewritten without the removable singularity.
            Builtin::Zigzag => {
                let t = 2.0 * PI * x[0];
                0.5 - t.cos() / (2.0 * (1.0 + t.sin().abs()))
            }
            Builtin::Renewal(a) => {
                let c = (2.0 * PI * x[0]).cos();
                (1.0 - a) * (1.0 - a) / (1.0 - 2.0 * a * c + a * a)
            }
            Builtin::RecipTrig(c) => 1.0 / Self::trig_value(c, x[0]),
            Builtin::Poly3 => {
                let t = 2.0 * PI * x[0];
                (3.0 + 4.0 * t.cos() + 2.0 * (2.0 * t).cos()) / 9.0
            }
        };
        Some(v)
    }

    /// Closed-form Fourier coefficient `f^(k)` for one-dimensional builtins.
    pub fn coeff(&self, k: i64) -> Option<Complex64> {
        let zero = Complex64::new(0.0, 0.0);
        let re = |v: f64| Complex64::new(v, 0.0);
        let c = match self {
            Builtin::Const(p) => {
                if k == 0 {
                    re(*p)
                } else {
                    zero
                }
            }
            Builtin::Sin2 => match k.abs() {
                0 => re(0.5),
                1 => re(-0.25),
                _ => zero,
            },
            Builtin::Sin2Half => {
                if k == 0 {
                    re(0.5)
                } else {
                    let kf = k as f64;
                    Complex64::new(0.0, 2.0 * kf / ((2.0 * kf - 1.0) * (2.0 * kf + 1.0) * PI))
                }
            }
            Builtin::HalfInd => arc_coeff(0.0, 0.5, k),
            Builtin::Lozenge => arc_coeff(1.0 / 3.0, 2.0 / 3.0, k),
            Builtin::Zigzag => re(zigzag_coeff(k)),
            Builtin::Renewal(a) => re((1.0 - a) / (1.0 + a) * a.powi(k.unsigned_abs() as i32)),
            Builtin::Poly3 => match k.abs() {
                0 => re(1.0 / 3.0),
                1 => re(2.0 / 9.0),
                2 => re(1.0 / 9.0),
                _ => zero,
            },
            Builtin::RecipTrig(c) => {
                // Degree <= 1: 1/(A + B cos 2πx) has coefficients r^{|k|} / sqrt(A^2 - B^2).
                let a0 = c[0];
                let b = if c.len() > 1 { 2.0 * c[1] } else { 0.0 };
                if c.len() > 2 && c[2..].iter().any(|&v| v != 0.0) {
                    return None;
                }
                if b == 0.0 {
                    return Some(if k == 0 { re(1.0 / a0) } else { zero });
                }
                let disc = (a0 * a0 - b * b).sqrt();
                let r = -(a0 - disc) / b;
                re(r.powi(k.unsigned_abs() as i32) / disc)
            }
            Builtin::Ust2d | Builtin::UstD(_) | Builtin::UstAxisG => return None,
        };
        Some(c)
    }

    /// Closed-form Fourier coefficient of `½ log f` where one is known.
    pub fn log_half_coeff(&self, k: i64) -> Option<Complex64> {
        let re = |v: f64| Complex64::new(v, 0.0);
        let kf = k.unsigned_abs() as f64;
        let c = match self {
            Builtin::Const(p) if *p > 0.0 => {
                if k == 0 {
                    re(0.5 * p.ln())
                } else {
                    re(0.0)
                }
            }
            Builtin::Sin2 => {
                if k == 0 {
                    re(-std::f64::consts::LN_2)
                } else {
                    re(-0.5 / kf)
                }
            }
            Builtin::Sin2Half => {
                if k == 0 {
                    re(-std::f64::consts::LN_2)
                } else {
                    let harmonic: f64 = (1..=k.unsigned_abs()).map(|j| 1.0 / (2 * j - 1) as f64).sum();
                    let v = Complex64::new(-0.25 / kf, harmonic / (kf * PI));
                    if k > 0 {
                        v
                    } else {
                        v.conj()
                    }
                }
            }
            Builtin::Renewal(a) => {
                if k == 0 {
                    re((1.0 - a).ln())
                } else {
                    re(a.powi(kf as i32) / (2.0 * kf))
                }
            }
            Builtin::Poly3 => {
                if k == 0 {
                    re(-(3.0f64).ln())
                } else if k.unsigned_abs().is_multiple_of(3) {
                    re(-1.0 / kf)
                } else {
                    re(0.5 / kf)
                }
            }
            Builtin::UstAxisG => {
                if k == 0 {
                    re(-0.5 * (SQRT_2 + 1.0).ln())
                } else {
                    let rho = (SQRT_2 - 1.0) * (SQRT_2 - 1.0);
                    re((rho.powi(kf as i32) - 1.0) / (4.0 * kf))
                }
            }
            _ => return None,
        };
        Some(c)
    }

    /// Closed-form Fourier coefficient of `½ log(1-f)` where one is known.
    pub fn log_half_coeff_complement(&self, k: i64) -> Option<Complex64> {
        let re = |v: f64| Complex64::new(v, 0.0);
        let kf = k.unsigned_abs() as f64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let c = match self {
            Builtin::Const(p) if *p < 1.0 => Builtin::Const(1.0 - p).log_half_coeff(k)?,
            // cos^2 is sin^2 shifted by 1/2
            Builtin::Sin2 => Builtin::Sin2.log_half_coeff(k)? * sign,
            // cos^2(πt/2) is sin^2(π(1-t)/2)
            Builtin::Sin2Half => Builtin::Sin2Half.log_half_coeff(k)?.conj(),
            // 1 - f = 4a sin^2(πx) / |1 - a e^{-2πix}|^2
            Builtin::Renewal(a) => {
                if k == 0 {
                    re(0.5 * a.ln())
                } else {
                    re((a.powi(kf as i32) - 1.0) / (2.0 * kf))
                }
            }
            // 1 - f = (8/9) sin^2(πx) (2 + cos 2πx), and 2 + cos t = c |1 + r e^{it}|^2
            Builtin::Poly3 => {
                let r = 2.0 - 3.0f64.sqrt();
                if k == 0 {
                    re(0.5 * (8.0f64 / 9.0).ln() - std::f64::consts::LN_2
                        + 0.5 * ((2.0 + 3.0f64.sqrt()) / 2.0).ln())
                } else {
                    re(-0.5 / kf - 0.5 * sign * r.powi(kf as i32) / kf)
                }
            }
            _ => return None,
        };
        Some(c)
    }

    /// Closed-form `(GM(f), HM(f))`; zero marks a divergent mean.
    pub fn closed_means(&self) -> Option<(f64, f64)> {
        let g = (-4.0 * CATALAN / PI).exp();
        match self {
            Builtin::Const(p) => Some((*p, *p)),
            Builtin::Sin2 | Builtin::Sin2Half => Some((0.25, 0.0)),
            Builtin::HalfInd | Builtin::Lozenge => Some((0.0, 0.0)),
            Builtin::Ust2d => Some((g, 0.0)),
            Builtin::UstAxisG => Some((SQRT_2 - 1.0, 0.0)),
            Builtin::Renewal(a) => {
                // 1/f = (1 + a^2 - 2a cos)/(1-a)^2 integrates to (1+a^2)/(1-a)^2.
                let hm = (1.0 - a) * (1.0 - a) / (1.0 + a * a);
                Some(((1.0 - a) * (1.0 - a), hm))
            }
            Builtin::Poly3 => Some((1.0 / 9.0, 0.0)),
            Builtin::Zigzag => Some(((-2.0 * CATALAN / PI).exp() / SQRT_2, 0.0)),
            _ => None,
        }
    }

    /// Closed-form `(GM(1-f), HM(1-f))`.
    pub fn closed_means_complement(&self) -> Option<(f64, f64)> {
        let g = (-4.0 * CATALAN / PI).exp();
        match self {
            Builtin::Const(p) => Some((1.0 - p, 1.0 - p)),
            Builtin::Sin2 | Builtin::Sin2Half => Some((0.25, 0.0)),
            Builtin::HalfInd | Builtin::Lozenge => Some((0.0, 0.0)),
            Builtin::Ust2d => Some((g, 0.0)),
            Builtin::UstAxisG => Some((
                2.0 * (SQRT_2 - 1.0) * (-2.0 * CATALAN / PI).exp(),
                PI / (1.0 + 2.0 * PI),
            )),
            // 1 - f = 4a sin^2(πx) / |e^{2πix} - a|^2
            Builtin::Renewal(a) => Some((*a, 0.0)),
            Builtin::Poly3 => Some(((2.0 + 3.0f64.sqrt()) / 9.0, 0.0)),
            Builtin::Zigzag => Some(((-2.0 * CATALAN / PI).exp() / SQRT_2, 0.0)),
            _ => None,
        }
    }

    /// Whether `1/f` (resp. `1/(1-f)`) is provably non-integrable.
    pub fn provable_hm_divergence(&self) -> (bool, bool) {
        match self {
            Builtin::Ust2d | Builtin::UstAxisG => (true, self == &Builtin::Ust2d),
            // 1/(1-f) is integrable exactly when d >= 4.
            Builtin::UstD(d) => (true, *d < 4),
            Builtin::Sin2 | Builtin::Sin2Half | Builtin::HalfInd | Builtin::Lozenge => (true, true),
            Builtin::Zigzag | Builtin::Poly3 => (true, true),
            Builtin::Renewal(_) => (false, true),
            Builtin::Const(p) => (*p == 0.0, *p == 1.0),
            _ => (false, false),
        }
    }

    /// Declared zero structure of `f` and `1-f`.
    pub fn zero_profile(&self) -> Option<ZeroProfile> {
        use VanishingOrder::Finite;
        use ZeroLocation::*;
        let e = |side, location, order| ZeroEntry {
            side,
            location,
            order,
        };
        let entries = match self {
            Builtin::Const(p) => {
                let mut v = Vec::new();
                if *p == 0.0 {
                    v.push(e(Side::F, PositiveMeasure, VanishingOrder::Flat));
                }
                if *p == 1.0 {
                    v.push(e(Side::OneMinusF, PositiveMeasure, VanishingOrder::Flat));
                }
                v
            }
            Builtin::Sin2 | Builtin::Sin2Half | Builtin::Poly3 => vec![
                e(Side::F, IsolatedPoint, Finite(2)),
                e(Side::OneMinusF, IsolatedPoint, Finite(2)),
            ],
            Builtin::HalfInd | Builtin::Lozenge => vec![
                e(Side::F, PositiveMeasure, VanishingOrder::Flat),
                e(Side::OneMinusF, PositiveMeasure, VanishingOrder::Flat),
            ],
            Builtin::Ust2d => vec![
                e(Side::F, AlgebraicCurve, Finite(2)),
                e(Side::OneMinusF, AlgebraicCurve, Finite(2)),
            ],
            Builtin::UstD(_) => vec![
                e(Side::F, AlgebraicCurve, Finite(2)),
                e(Side::OneMinusF, AlgebraicCurve, Finite(2)),
            ],
            Builtin::UstAxisG => vec![e(Side::F, IsolatedPoint, Finite(1))],
            Builtin::Zigzag => vec![
                e(Side::F, IsolatedPoint, Finite(1)),
                e(Side::OneMinusF, IsolatedPoint, Finite(1)),
            ],
            Builtin::Renewal(_) => vec![e(Side::OneMinusF, IsolatedPoint, Finite(2))],
            Builtin::RecipTrig(_) => vec![e(Side::OneMinusF, IsolatedPoint, Finite(2))],
        };
        Some(ZeroProfile { entries })
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Const(p) => write!(f, "const({p:?})"),
            Builtin::UstD(d) => write!(f, "ustd({d})"),
            Builtin::Renewal(a) => write!(f, "renewal({a:?})"),
            Builtin::RecipTrig(c) => {
                let parts: Vec<String> = c.iter().map(|v| format!("{v:?}")).collect();
                write!(f, "recip_trig({})", parts.join(", "))
            }
            other => write!(f, "{}", other.name()),
        }
    }
}

/// Indicator of `(t - a) mod 1 ∈ [0, b - a)`.
pub fn arc_indicator(a: f64, b: f64, t: f64) -> f64 {
    let width = b - a;
    if width >= 1.0 {
        return 1.0;
    }
    let u = (t - a).rem_euclid(1.0);
    if u < width {
        1.0
    } else {
        0.0
    }
}

/// Fourier coefficient of the indicator of the arc `[a, b)`.
pub fn arc_coeff(a: f64, b: f64, k: i64) -> Complex64 {
    if k == 0 {
        return Complex64::new((b - a).min(1.0), 0.0);
    }
    if b - a >= 1.0 {
        return Complex64::new(0.0, 0.0);
    }
    let w = 2.0 * PI * k as f64;
    let ea = Complex64::from_polar(1.0, -w * a);
    let eb = Complex64::from_polar(1.0, -w * b);
    (ea - eb) / Complex64::new(0.0, w)
}

fn zigzag_coeff(k: i64) -> f64 {
    if k == 0 {
        return 0.5;
    }
    if k % 2 == 0 {
        return 0.0;
    }
    let ka = k.unsigned_abs();
    let half = (ka - 1) / 2;
    let partial: f64 = (0..=half)
        .map(|j| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            s / (2 * j + 1) as f64
        })
        .sum();
    let sign = if half.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * (-0.5 + 2.0 / PI * partial) - 1.0 / (PI * ka as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arc_half_matches_domino_coefficients() {
        for k in -9i64..=9 {
            let c = arc_coeff(0.0, 0.5, k);
            let expected = if k == 0 {
                Complex64::new(0.5, 0.0)
            } else if k % 2 == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0) / Complex64::new(0.0, PI * k as f64)
            };
            assert!((c - expected).norm() < 1e-15, "k={k}");
        }
    }

    #[test]
    fn renewal_eval_at_zero_is_one() {
        let b = Builtin::Renewal(0.5);
        assert!((b.eval(&[0.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn recip_trig_degree_one_matches_renewal() {
        let a: f64 = 0.3;
        let s = (1.0 - a) * (1.0 - a);
        let r = Builtin::from_call("recip_trig", &[(1.0 + a * a) / s, -a / s]).unwrap();
        let ren = Builtin::Renewal(a);
        for k in -6..=6 {
            assert!((r.coeff(k).unwrap() - ren.coeff(k).unwrap()).norm() < 1e-14);
        }
        for x in [0.0, 0.1, 0.37, 0.5, 0.9] {
            assert!((r.eval(&[x]).unwrap() - ren.eval(&[x]).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn recip_trig_rejects_small_polynomial() {
        assert!(Builtin::from_call("recip_trig", &[1.0, 0.2]).is_err());
    }

    #[test]
    fn zigzag_first_coefficient() {
        let expected = 1.0 / PI - 0.5;
        assert!((zigzag_coeff(1) - expected).abs() < 1e-15);
        assert_eq!(zigzag_coeff(4), 0.0);
        assert_eq!(zigzag_coeff(-3), zigzag_coeff(3));
    }

    #[test]
    fn parameter_validation() {
        assert!(Builtin::from_call("renewal", &[1.0]).is_err());
        assert!(Builtin::from_call("const", &[1.5]).is_err());
        assert!(Builtin::from_call("ustd", &[2.5]).is_err());
        assert!(matches!(
            Builtin::from_call("sin2", &[1.0]),
            Err(Error::Arity { .. })
        ));
    }
}
