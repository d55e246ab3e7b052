//! Symbols `f: T^d -> [0,1]`: parsing, evaluation and transformations.

pub mod builtin;
pub mod config;
pub mod expr;
pub mod parse;
pub mod profile;
pub mod step;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use builtin::{Builtin, CATALAN};
pub use expr::{BinOp, Expr, Func};
pub use profile::{Side, VanishingOrder, ZeroEntry, ZeroLocation, ZeroProfile};
pub use step::StepFn;

use crate::error::{Error, Result};

/// Raw values within this distance of `[0,1]` are clamped silently.
pub const RANGE_SLACK: f64 = 1e-9;

/// A point of the torus, coordinates reduced to `[0,1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: impl Into<Vec<f64>>) -> Point {
        let mut c: Vec<f64> = coords.into();
        for t in &mut c {
            *t = t.rem_euclid(1.0);
            // rem_euclid can round up to exactly 1.0 for tiny negative inputs
            if *t >= 1.0 {
                *t = 0.0;
            }
        }
        Point(c)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolSpec {
    pub name: Option<String>,
    pub dim: usize,
    pub expr: Expr,
    pub zero_profile: Option<ZeroProfile>,
}

/// Parses a symbol expression. Bare builtins pick up their declared zero profile.
pub fn parse_symbol(text: &str, dim: usize) -> Result<SymbolSpec> {
    if dim == 0 {
        return Err(Error::Precondition("dimension must be positive".into()));
    }
    let expr = parse::parse_expr(text, dim)?;
    Ok(SymbolSpec::from_expr(expr, dim))
}

impl SymbolSpec {
    pub fn from_expr(expr: Expr, dim: usize) -> SymbolSpec {
        let zero_profile = match &expr {
            Expr::Builtin(b) => b.zero_profile(),
            _ => None,
        };
        SymbolSpec {
            name: None,
            dim,
            expr,
            zero_profile,
        }
    }

    pub fn builtin(b: Builtin) -> SymbolSpec {
        let dim = b.dim();
        SymbolSpec::from_expr(Expr::Builtin(b), dim)
    }

    pub fn constant(p: f64) -> SymbolSpec {
        SymbolSpec::builtin(Builtin::Const(p))
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn with_profile(mut self, profile: ZeroProfile) -> Self {
        self.zero_profile = Some(profile);
        self
    }

    /// The builtin this symbol is, if it is a bare builtin.
    pub fn as_builtin(&self) -> Option<&Builtin> {
        match &self.expr {
            Expr::Builtin(b) => Some(b),
            _ => None,
        }
    }

    /// The builtin `b` if this symbol is exactly `1 - b`.
    pub fn as_complement_of_builtin(&self) -> Option<&Builtin> {
        match &self.expr {
            Expr::Binary(BinOp::Sub, one, inner) if **one == Expr::Const(1.0) => match &**inner {
                Expr::Builtin(b) => Some(b),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn as_step(&self) -> Option<StepFn> {
        if self.dim != 1 {
            return None;
        }
        StepFn::recognize(&self.expr)
    }

    /// Unchecked evaluation at reduced coordinates (no clamping, no range check).
    pub fn raw(&self, x: &[f64]) -> Result<f64> {
        self.expr.eval(x).map_err(|_| Error::Singularity {
            point: x.to_vec(),
        })
    }

    /// Evaluates `f(x)`, clamped to `[0,1]`.
    ///
    /// Values farther than [`RANGE_SLACK`] outside `[0,1]` are rejected.
    pub fn eval(&self, x: &Point) -> Result<f64> {
        if x.dim() != self.dim {
            return Err(Error::Precondition(format!(
                "point has {} coordinates, symbol has dimension {}",
                x.dim(),
                self.dim
            )));
        }
        self.eval_reduced(x.coords())
    }

    /// As [`SymbolSpec::eval`], for coordinates already in `[0,1)`.
    pub fn eval_reduced(&self, x: &[f64]) -> Result<f64> {
        let v = self.raw(x)?;
        if !(-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&v) {
            return Err(Error::OutOfRange {
                value: v,
                point: x.to_vec(),
            });
        }
        Ok(v.clamp(0.0, 1.0))
    }

    /// The symbol `1 - f`.
    pub fn complement(&self) -> SymbolSpec {
        let expr = match &self.expr {
            Expr::Binary(BinOp::Sub, one, inner) if **one == Expr::Const(1.0) => (**inner).clone(),
            Expr::Builtin(Builtin::Const(p)) => Expr::Builtin(Builtin::Const(1.0 - p)),
            e => Expr::binary(BinOp::Sub, Expr::Const(1.0), e.clone()),
        };
        SymbolSpec {
            name: self.name.as_ref().map(|n| match n.strip_prefix("1-") {
                Some(inner) => inner.to_string(),
                None => format!("1-{n}"),
            }),
            dim: self.dim,
            expr,
            zero_profile: self.zero_profile.as_ref().map(ZeroProfile::complemented),
        }
    }

    /// The symbol `x ↦ f(n x)`.
    pub fn mult_arg(&self, n: u32) -> Result<SymbolSpec> {
        if self.dim != 1 {
            return Err(Error::Precondition("mult_arg needs a one-dimensional symbol".into()));
        }
        if n == 0 {
            return Err(Error::Precondition("multiplier must be positive".into()));
        }
        if n == 1 {
            return Ok(self.clone());
        }
        let expr = match &self.expr {
            Expr::Builtin(Builtin::Const(_)) | Expr::Const(_) => self.expr.clone(),
            Expr::Dilate { factor, inner } => Expr::Dilate {
                factor: factor * n,
                inner: inner.clone(),
            },
            e => Expr::Dilate {
                factor: n,
                inner: Box::new(e.clone()),
            },
        };
        Ok(SymbolSpec {
            name: self.name.as_ref().map(|s| format!("M{n}({s})")),
            dim: 1,
            expr,
            zero_profile: self.zero_profile.clone(),
        })
    }

    /// The averaged symbol `f_r` whose coefficients are `f^(r k)`.
    pub fn fold(&self, r: u32) -> Result<SymbolSpec> {
        if r == 0 {
            return Err(Error::Precondition("fold factor must be positive".into()));
        }
        if r == 1 {
            return Ok(self.clone());
        }
        Ok(SymbolSpec {
            name: self.name.as_ref().map(|s| format!("{s}_{r}")),
            dim: self.dim,
            expr: Expr::Fold {
                factor: r,
                inner: Box::new(self.expr.clone()),
            },
            zero_profile: None,
        })
    }

    /// Content key used for caching: the printed expression and dimension.
    pub fn content_key(&self) -> String {
        format!("d={};{}", self.dim, self.expr)
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.expr.to_string())
    }
}

impl fmt::Display for SymbolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_half() {
        let s = parse_symbol("0.5", 1).unwrap();
        assert_eq!(s.eval(&Point::new([0.3])).unwrap(), 0.5);
    }

    #[test]
    fn builtin_evaluations() {
        let ust = SymbolSpec::builtin(Builtin::Ust2d);
        assert!((ust.eval(&Point::new([0.25, 0.25])).unwrap() - 0.5).abs() < 1e-15);
        let g = SymbolSpec::builtin(Builtin::UstAxisG);
        assert!((g.eval(&Point::new([0.5])).unwrap() - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        let r = SymbolSpec::builtin(Builtin::Renewal(0.5));
        assert!((r.eval(&Point::new([0.0])).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ust2d_is_singular_at_origin() {
        let ust = SymbolSpec::builtin(Builtin::Ust2d);
        assert!(matches!(
            ust.eval(&Point::new([0.0, 0.0])),
            Err(Error::Singularity { .. })
        ));
    }

    #[test]
    fn zigzag_removable_singularity_takes_limit() {
        let z = SymbolSpec::builtin(Builtin::Zigzag);
        assert!((z.eval(&Point::new([0.25])).unwrap() - 0.5).abs() < 1e-15);
        // agrees with the unsimplified closed form away from cos 2πx = 0
        for x in [0.1, 0.3, 0.6, 0.9] {
            let t = 2.0 * PI * x;
            let direct = 0.5 + (t.sin().abs() - 1.0) / (2.0 * t.cos());
            assert!((z.eval(&Point::new([x])).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_range_is_rejected_and_slack_is_clamped() {
        let s = parse_symbol("1.5 * sin2", 1).unwrap();
        assert!(matches!(
            s.eval(&Point::new([0.5])),
            Err(Error::OutOfRange { .. })
        ));
        let s = parse_symbol("1 + 1e-12", 1).unwrap();
        assert_eq!(s.eval(&Point::new([0.1])).unwrap(), 1.0);
    }

    #[test]
    fn division_by_zero_is_a_singularity() {
        let s = parse_symbol("0.1 / sin(pi*x)", 1).unwrap();
        assert!(matches!(
            s.eval(&Point::new([0.0])),
            Err(Error::Singularity { .. })
        ));
    }

    #[test]
    fn complement_examples() {
        let c = SymbolSpec::constant(0.3).complement();
        assert_eq!(c.as_builtin(), Some(&Builtin::Const(0.7)));
        let ust = SymbolSpec::builtin(Builtin::Ust2d);
        let comp = ust.complement();
        for (x, y) in [(0.1, 0.7), (0.33, 0.21), (0.9, 0.45)] {
            let a = comp.eval(&Point::new([x, y])).unwrap();
            let b = ust.eval(&Point::new([y, x])).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(comp.complement(), ust);
    }

    #[test]
    fn mult_arg_identity_and_constant() {
        let s = SymbolSpec::builtin(Builtin::Sin2);
        assert_eq!(s.mult_arg(1).unwrap(), s);
        let c = SymbolSpec::constant(0.4);
        assert_eq!(c.mult_arg(5).unwrap().expr, c.expr);
        let d = s.mult_arg(2).unwrap().mult_arg(3).unwrap();
        assert!(matches!(d.expr, Expr::Dilate { factor: 6, .. }));
    }

    #[test]
    fn point_reduction() {
        let p = Point::new([1.25, -0.25, -1e-20]);
        assert_eq!(p.coords()[0], 0.25);
        assert_eq!(p.coords()[1], 0.75);
        assert!(p.coords()[2] < 1.0);
    }
}
