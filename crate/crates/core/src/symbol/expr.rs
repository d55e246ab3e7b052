use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::builtin::{arc_indicator, Builtin};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Func {
    Sin,
    Cos,
    Abs,
    Sqrt,
    Exp,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Abs => v.abs(),
            Func::Sqrt => v.sqrt(),
            Func::Exp => v.exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Min,
    Max,
}

/// Expression tree over the torus coordinates.
///
/// `Var(j)` is the 0-based coordinate `x_{j+1}`. Arguments of `Dilate` and
/// `Fold` are evaluated at transformed points; everything else is pointwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Const(f64),
    Pi,
    Var(usize),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
    /// Indicator of `x_axis mod 1 ∈ [a, b)`.
    Arc { a: f64, b: f64, axis: usize },
    Builtin(Builtin),
    /// `x ↦ inner(n x)`.
    Dilate { factor: u32, inner: Box<Expr> },
    /// `t ↦ r^{-d} Σ inner(x)` over the `r^d` preimages of `t` under `x ↦ r x`.
    Fold { factor: u32, inner: Box<Expr> },
}

/// Marker for a point where the expression is not defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Singular;

impl Expr {
    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    /// Evaluates at a point with coordinates already reduced to `[0,1)`.
    pub fn eval(&self, x: &[f64]) -> Result<f64, Singular> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Pi => PI,
            Expr::Var(j) => x[*j],
            Expr::Neg(e) => -e.eval(x)?,
            Expr::Binary(op, a, b) => {
                let (u, v) = (a.eval(x)?, b.eval(x)?);
                match op {
                    BinOp::Add => u + v,
                    BinOp::Sub => u - v,
                    BinOp::Mul => u * v,
                    BinOp::Div => {
                        if v == 0.0 {
                            return Err(Singular);
                        }
                        u / v
                    }
                    BinOp::Pow => u.powf(v),
                    BinOp::Min => u.min(v),
                    BinOp::Max => u.max(v),
                }
            }
            Expr::Call(f, e) => f.apply(e.eval(x)?),
            Expr::Arc { a, b, axis } => arc_indicator(*a, *b, x[*axis]),
            Expr::Builtin(b) => b.eval(x).ok_or(Singular)?,
            Expr::Dilate { factor, inner } => {
                let y: Vec<f64> = x
                    .iter()
                    .map(|t| (t * *factor as f64).rem_euclid(1.0))
                    .collect();
                inner.eval(&y)?
            }
            Expr::Fold { factor, inner } => {
                let r = *factor as usize;
                let d = x.len();
                let count = r.pow(d as u32);
                let mut y = vec![0.0; d];
                let mut total = 0.0;
                for idx in 0..count {
                    let mut rem = idx;
                    for (j, yj) in y.iter_mut().enumerate() {
                        let shift = rem % r;
                        rem /= r;
                        *yj = (x[j] + shift as f64) / r as f64;
                    }
                    total += inner.eval(&y)?;
                }
                total / count as f64
            }
        };
        if v.is_nan() {
            return Err(Singular);
        }
        Ok(v)
    }

    /// Largest coordinate index the expression reads, plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Pi => 0,
            Expr::Var(j) => j + 1,
            Expr::Neg(e) | Expr::Call(_, e) => e.arity(),
            Expr::Binary(_, a, b) => a.arity().max(b.arity()),
            Expr::Arc { axis, .. } => axis + 1,
            Expr::Builtin(b) => b.dim(),
            Expr::Dilate { inner, .. } | Expr::Fold { inner, .. } => inner.arity(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Binary(BinOp::Pow, ..) => 4,
            Expr::Const(c) if *c < 0.0 => 3,
            _ => 5,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Pi => write!(f, "pi"),
            Expr::Var(j) => write!(f, "x{}", j + 1),
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.fmt_child(f, 4)
            }
            Expr::Binary(op, a, b) => match op {
                BinOp::Min | BinOp::Max => {
                    let name = if *op == BinOp::Min { "min" } else { "max" };
                    write!(f, "{name}({a}, {b})")
                }
                BinOp::Pow => {
                    a.fmt_child(f, 5)?;
                    write!(f, "^")?;
                    b.fmt_child(f, 4)
                }
                _ => {
                    let (sym, prec) = match op {
                        BinOp::Add => ("+", 1),
                        BinOp::Sub => ("-", 1),
                        BinOp::Mul => ("*", 2),
                        _ => ("/", 2),
                    };
                    a.fmt_child(f, prec)?;
                    write!(f, " {sym} ")?;
                    // Right operand of a left-associative operator needs strictly higher precedence.
                    b.fmt_child(f, prec + 1)
                }
            },
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Arc { a, b, axis } => {
                if *axis == 0 {
                    write!(f, "arc({a:?}, {b:?})")
                } else {
                    write!(f, "arc({a:?}, {b:?}, {})", axis + 1)
                }
            }
            Expr::Builtin(b) => write!(f, "{b}"),
            Expr::Dilate { factor, inner } => write!(f, "dilate({factor}, {inner})"),
            Expr::Fold { factor, inner } => write!(f, "fold({factor}, {inner})"),
        }
    }
}
