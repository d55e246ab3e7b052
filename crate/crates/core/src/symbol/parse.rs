//! Recursive-descent parser for the symbol expression language.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" unary)?
//! primary := number | "pi" | variable | ident "(" args ")" | ident | "(" expr ")"
//! ```
//!
//! Variables are `x1`..`x8`, with `x, y, z, w` as aliases for `x1`..`x4`.

use super::builtin::Builtin;
use super::expr::{BinOp, Expr, Func};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(text: &'a str) -> Result<Vec<(Tok, usize)>> {
        let mut lx = Lexer {
            src: text.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        loop {
            let (tok, at) = lx.next()?;
            let end = tok == Tok::End;
            out.push((tok, at));
            if end {
                return Ok(out);
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, usize)> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c as char),
            b'0'..=b'9' | b'.' => return self.number(start),
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while self
                    .src
                    .get(self.pos)
                    .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
                {
                    self.pos += 1;
                }
                let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                return Ok((Tok::Ident(s.to_string()), start));
            }
            other => {
                return Err(Error::Syntax {
                    offset: start,
                    message: format!("unexpected character `{}`", other as char),
                })
            }
        };
        self.pos += 1;
        Ok((tok, start))
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize)> {
        let digits = |lx: &mut Self| {
            while lx.src.get(lx.pos).is_some_and(u8::is_ascii_digit) {
                lx.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                digits(self);
            } else {
                self.pos = save;
            }
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        s.parse::<f64>()
            .map(|v| (Tok::Num(v), start))
            .map_err(|_| Error::Syntax {
                offset: start,
                message: format!("malformed number `{s}`"),
            })
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    i: usize,
    dim: usize,
}

/// Parses `text` as a symbol expression on the `dim`-dimensional torus.
pub fn parse_expr(text: &str, dim: usize) -> Result<Expr> {
    let mut p = Parser {
        toks: Lexer::tokens(text)?,
        i: 0,
        dim,
    };
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn offset(&self) -> usize {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if t != Tok::End {
            self.i += 1;
        }
        t
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else if *self.peek() == Tok::End {
            self.syntax(format!("unexpected end of input, expected {what}"))
        } else {
            self.syntax(format!("expected {what}"))
        }
    }

    fn expect_end(&self) -> Result<()> {
        match self.peek() {
            Tok::End => Ok(()),
            Tok::RParen => self.syntax("unbalanced `)`"),
            _ => self.syntax("unexpected trailing input"),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Tok::Op(c @ ('+' | '-')) = *self.peek() {
            self.bump();
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = *self.peek() {
            self.bump();
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if *self.peek() == Tok::Op('+') {
            self.bump();
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::binary(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let at = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => self.identifier(name, at),
            Tok::End => {
                self.i = self.toks.len() - 1;
                self.syntax("unexpected end of input")
            }
            _ => {
                self.i -= 1;
                self.syntax("expected an operand")
            }
        }
    }

    fn args(&mut self) -> Result<Vec<Expr>> {
        let mut args = Vec::new();
        if *self.peek() == Tok::RParen {
            self.bump();
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RParen => {
                    self.bump();
                    return Ok(args);
                }
                Tok::End => return self.syntax("unexpected end of input, expected `)`"),
                _ => return self.syntax("expected `,` or `)`"),
            }
        }
    }

    fn variable(&self, name: &str) -> Option<usize> {
        match name {
            "x" => Some(1),
            "y" => Some(2),
            "z" => Some(3),
            "w" => Some(4),
            _ => {
                let idx: usize = name.strip_prefix('x')?.parse().ok()?;
                (1..=8).contains(&idx).then_some(idx)
            }
        }
    }

    fn identifier(&mut self, name: String, at: usize) -> Result<Expr> {
        if name == "pi" {
            return Ok(Expr::Pi);
        }
        if let Some(idx) = self.variable(&name) {
            if idx > self.dim {
                return Err(Error::DimensionMismatch {
                    index: idx,
                    dim: self.dim,
                });
            }
            return Ok(Expr::Var(idx - 1));
        }
        let known = Func::from_name(&name).is_some()
            || Builtin::is_builtin_name(&name)
            || matches!(name.as_str(), "min" | "max" | "arc" | "dilate" | "fold");
        if !known {
            return Err(Error::UnknownIdentifier { name, offset: at });
        }
        let args = if *self.peek() == Tok::LParen {
            self.bump();
            self.args()?
        } else {
            Vec::new()
        };
        let arity_err = |expected: &str, got: usize| Error::Arity {
            name: name.clone(),
            expected: expected.to_string(),
            got,
        };
        if let Some(func) = Func::from_name(&name) {
            let [arg]: [Expr; 1] = args.try_into().map_err(|a: Vec<_>| arity_err("1", a.len()))?;
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        match name.as_str() {
            "min" | "max" => {
                let [a, b]: [Expr; 2] =
                    args.try_into().map_err(|a: Vec<_>| arity_err("2", a.len()))?;
                let op = if name == "min" { BinOp::Min } else { BinOp::Max };
                Ok(Expr::binary(op, a, b))
            }
            "arc" => {
                if !(2..=3).contains(&args.len()) {
                    return Err(arity_err("2 or 3", args.len()));
                }
                let nums = numeric_args(&name, &args)?;
                let axis = if nums.len() == 3 {
                    let j = nums[2];
                    if j.fract() != 0.0 || j < 1.0 {
                        return Err(Error::InvalidParameter {
                            name,
                            message: format!("axis {j} must be a positive integer"),
                        });
                    }
                    j as usize
                } else {
                    1
                };
                if axis > self.dim {
                    return Err(Error::DimensionMismatch {
                        index: axis,
                        dim: self.dim,
                    });
                }
                let (a, b) = (nums[0], nums[1]);
                if !(a <= b && b - a <= 1.0) {
                    return Err(Error::InvalidParameter {
                        name,
                        message: format!("arc({a}, {b}) needs a <= b <= a + 1"),
                    });
                }
                Ok(Expr::Arc {
                    a,
                    b,
                    axis: axis - 1,
                })
            }
            "dilate" | "fold" => {
                let [n, inner]: [Expr; 2] =
                    args.try_into().map_err(|a: Vec<_>| arity_err("2", a.len()))?;
                let factor = match constant_value(&n) {
                    Some(v) if v.fract() == 0.0 && v >= 1.0 => v as u32,
                    _ => {
                        return Err(Error::InvalidParameter {
                            name,
                            message: "factor must be a positive integer constant".into(),
                        })
                    }
                };
                let inner = Box::new(inner);
                Ok(if name == "dilate" {
                    Expr::Dilate { factor, inner }
                } else {
                    Expr::Fold { factor, inner }
                })
            }
            _ => {
                let nums = numeric_args(&name, &args)?;
                let b = Builtin::from_call(&name, &nums).map_err(|e| match e {
                    Error::UnknownIdentifier { name, .. } => {
                        Error::UnknownIdentifier { name, offset: at }
                    }
                    other => other,
                })?;
                if b.dim() > self.dim {
                    return Err(Error::DimensionMismatch {
                        index: b.dim(),
                        dim: self.dim,
                    });
                }
                Ok(Expr::Builtin(b))
            }
        }
    }
}

fn constant_value(e: &Expr) -> Option<f64> {
    match e {
        Expr::Const(c) => Some(*c),
        Expr::Pi => Some(std::f64::consts::PI),
        Expr::Neg(inner) => constant_value(inner).map(|v| -v),
        Expr::Binary(op, a, b) => {
            let (u, v) = (constant_value(a)?, constant_value(b)?);
            Some(match op {
                BinOp::Add => u + v,
                BinOp::Sub => u - v,
                BinOp::Mul => u * v,
                BinOp::Div => u / v,
                BinOp::Pow => u.powf(v),
                BinOp::Min => u.min(v),
                BinOp::Max => u.max(v),
            })
        }
        _ => None,
    }
}

fn numeric_args(name: &str, args: &[Expr]) -> Result<Vec<f64>> {
    args.iter()
        .map(|a| {
            constant_value(a).ok_or_else(|| Error::InvalidParameter {
                name: name.to_string(),
                message: "arguments must be numeric constants".into(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unbalanced_paren_reports_end_offset() {
        match parse_expr("arc(0,0.5", 1) {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 9),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn stray_close_paren() {
        assert!(matches!(
            parse_expr("x1)", 1),
            Err(Error::Syntax { offset: 2, .. })
        ));
    }

    #[test]
    fn unknown_identifier_has_offset() {
        match parse_expr("1 + foo(2)", 1) {
            Err(Error::UnknownIdentifier { name, offset }) => {
                assert_eq!(name, "foo");
                assert_eq!(offset, 4);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            parse_expr("x1 * y", 1),
            Err(Error::DimensionMismatch { index: 2, dim: 1 })
        ));
        assert!(matches!(
            parse_expr("ust2d", 1),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn arity_mismatch() {
        assert!(matches!(parse_expr("sin(x, y)", 2), Err(Error::Arity { .. })));
        assert!(matches!(parse_expr("max(x)", 1), Err(Error::Arity { .. })));
    }

    #[test]
    fn precedence_and_power() {
        let e = parse_expr("-2^2 + 3*4/2", 1).unwrap();
        assert_eq!(e.eval(&[0.0]).unwrap(), 2.0);
        let e = parse_expr("2^3^2", 1).unwrap();
        assert_eq!(e.eval(&[0.0]).unwrap(), 512.0);
        let e = parse_expr("1e-1 + 2.5E1", 1).unwrap();
        assert!((e.eval(&[0.0]).unwrap() - 25.1).abs() < 1e-12);
    }

    #[test]
    fn builtin_with_and_without_parens() {
        let a = parse_expr("sin2", 1).unwrap();
        let b = parse_expr("sin2()", 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            parse_expr("renewal(1/2)", 1).unwrap(),
            Expr::Builtin(Builtin::Renewal(0.5))
        );
    }
}
