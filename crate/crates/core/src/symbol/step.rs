//! Exact handling of piecewise-constant one-dimensional symbols.
//!
//! Any affine combination of arc indicators is recognised structurally, which
//! gives exact Fourier coefficients, exact `½ log f` coefficients and exact
//! means without quadrature.

use num_complex::Complex64;

use super::builtin::{arc_coeff, arc_indicator, Builtin};
use super::expr::{BinOp, Expr};

#[derive(Debug, Clone, PartialEq)]
pub struct StepFn {
    pub offset: f64,
    /// `(a, b, weight)` meaning `weight · 1_[a,b)` on the circle.
    pub arcs: Vec<(f64, f64, f64)>,
}

/// A piece `[start, end)` of `[0,1)` on which the step function is constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub value: f64,
}

impl StepFn {
    fn constant(c: f64) -> StepFn {
        StepFn {
            offset: c,
            arcs: Vec::new(),
        }
    }

    fn arc(a: f64, b: f64) -> StepFn {
        StepFn {
            offset: 0.0,
            arcs: vec![(a, b, 1.0)],
        }
    }

    fn scale(mut self, s: f64) -> StepFn {
        self.offset *= s;
        for arc in &mut self.arcs {
            arc.2 *= s;
        }
        self
    }

    fn add(mut self, other: StepFn) -> StepFn {
        self.offset += other.offset;
        self.arcs.extend(other.arcs);
        self
    }

    fn dilate(self, n: u32) -> StepFn {
        let nf = n as f64;
        let mut arcs = Vec::with_capacity(self.arcs.len() * n as usize);
        for (a, b, w) in self.arcs {
            if b - a >= 1.0 {
                arcs.push((0.0, 1.0, w));
                continue;
            }
            for j in 0..n {
                arcs.push(((a + j as f64) / nf, (b + j as f64) / nf, w));
            }
        }
        StepFn {
            offset: self.offset,
            arcs,
        }
    }

    /// Recognises `expr` as a step function on the circle, if it is one.
    pub fn recognize(expr: &Expr) -> Option<StepFn> {
        match expr {
            Expr::Const(c) => Some(StepFn::constant(*c)),
            Expr::Pi => Some(StepFn::constant(std::f64::consts::PI)),
            Expr::Arc { a, b, axis: 0 } => Some(StepFn::arc(*a, *b)),
            Expr::Builtin(Builtin::Const(p)) => Some(StepFn::constant(*p)),
            Expr::Builtin(Builtin::HalfInd) => Some(StepFn::arc(0.0, 0.5)),
            Expr::Builtin(Builtin::Lozenge) => Some(StepFn::arc(1.0 / 3.0, 2.0 / 3.0)),
            Expr::Neg(e) => Some(Self::recognize(e)?.scale(-1.0)),
            Expr::Dilate { factor, inner } => Some(Self::recognize(inner)?.dilate(*factor)),
            Expr::Binary(op, a, b) => {
                let (sa, sb) = (Self::recognize(a)?, Self::recognize(b)?);
                match op {
                    BinOp::Add => Some(sa.add(sb)),
                    BinOp::Sub => Some(sa.add(sb.scale(-1.0))),
                    BinOp::Mul => match (sa.as_constant(), sb.as_constant()) {
                        (Some(c), _) => Some(sb.scale(c)),
                        (_, Some(c)) => Some(sa.scale(c)),
                        _ => None,
                    },
                    BinOp::Div => sb
                        .as_constant()
                        .filter(|c| *c != 0.0)
                        .map(|c| sa.scale(1.0 / c)),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    fn as_constant(&self) -> Option<f64> {
        self.arcs
            .iter()
            .all(|(_, _, w)| *w == 0.0)
            .then_some(self.offset)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.offset
            + self
                .arcs
                .iter()
                .map(|(a, b, w)| w * arc_indicator(*a, *b, t))
                .sum::<f64>()
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        let mut c: Complex64 = self
            .arcs
            .iter()
            .map(|(a, b, w)| arc_coeff(*a, *b, k) * *w)
            .sum();
        if k == 0 {
            c += self.offset;
        }
        c
    }

    /// Partition of `[0,1)` into maximal pieces of constant value.
    pub fn pieces(&self) -> Vec<Piece> {
        let mut cuts: Vec<f64> = vec![0.0, 1.0];
        for (a, b, _) in &self.arcs {
            cuts.push(a.rem_euclid(1.0));
            cuts.push(b.rem_euclid(1.0));
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
        cuts.windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| Piece {
                start: w[0],
                end: w[1],
                value: self.eval(0.5 * (w[0] + w[1])),
            })
            .collect()
    }

    /// Applies `g` piecewise and returns the Fourier coefficient of `g ∘ f`.
    pub fn map_coeff(pieces: &[Piece], k: i64, g: impl Fn(f64) -> f64) -> Complex64 {
        pieces
            .iter()
            .map(|p| arc_coeff(p.start, p.end, k) * g(p.value))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::parse::parse_expr;

    #[test]
    fn recognises_affine_arc_combination() {
        let e = parse_expr("0.98*arc(0,0.5) + 0.01", 1).unwrap();
        let s = StepFn::recognize(&e).unwrap();
        assert!((s.eval(0.2) - 0.99).abs() < 1e-15);
        assert!((s.eval(0.7) - 0.01).abs() < 1e-15);
        let pieces = s.pieces();
        assert_eq!(pieces.len(), 2);
        // f~^(k) = ((-1)^k - 1)/(2kπ) i (1 - 2δ) for k != 0
        for k in 1..6i64 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let expected = Complex64::new(0.0, (sign - 1.0) / (2.0 * k as f64 * std::f64::consts::PI) * 0.98);
            assert!((s.coeff(k) - expected).norm() < 1e-15, "k={k}");
        }
    }

    #[test]
    fn smooth_expressions_are_not_steps() {
        let e = parse_expr("sin(x)^2", 1).unwrap();
        assert!(StepFn::recognize(&e).is_none());
        let e = parse_expr("arc(0,0.5)*arc(0.25,0.75)", 1).unwrap();
        assert!(StepFn::recognize(&e).is_none());
    }
}
