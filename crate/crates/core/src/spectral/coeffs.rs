use std::f64::consts::PI;

use num_complex::Complex64;

use super::quad::{self, QuadParams};
use super::table::{CoeffTable, Provenance};
use crate::error::{Error, Result};
use crate::symbol::{Builtin, Expr, SymbolSpec};

/// Fourier coefficients of `spec` on the box `|k_j| <= kmax_j`.
///
/// Closed forms are used where known (constants, step functions, most
/// one-dimensional builtins and their complements, dilations and folds of
/// those). The planar spanning-tree symbol is reduced to one-dimensional
/// integrals. Everything else goes through midpoint quadrature with
/// Richardson refinement, or Monte Carlo in dimension three and up.
pub fn fourier_coeffs(spec: &SymbolSpec, kmax: &[i64], quad: &QuadParams) -> Result<CoeffTable> {
    if kmax.len() != spec.dim || kmax.iter().any(|&k| k < 0) {
        return Err(Error::Precondition(format!(
            "kmax {kmax:?} does not match dimension {}",
            spec.dim
        )));
    }
    if quad.closed_form {
        if let Some(t) = exact(spec, kmax)? {
            return Ok(t);
        }
        if spec.as_builtin() == Some(&Builtin::Ust2d) {
            return ust2d_reduced(kmax, quad);
        }
        if let Some(Builtin::Ust2d) = spec.as_complement_of_builtin() {
            // 1 - f(x, y) = f(y, x)
            let t = ust2d_reduced(&[kmax[1], kmax[0]], quad)?;
            return Ok(CoeffTable::from_fn(kmax, t.provenance.clone(), |k| {
                t.get(&[k[1], k[0]]).expect("swapped box")
            }));
        }
    }
    if spec.dim >= 3 {
        return monte_carlo_coeffs(spec, kmax, quad);
    }
    quadrature_coeffs(spec, kmax, quad)
}

/// Exact table when the symbol has a recognised closed form.
fn exact(spec: &SymbolSpec, kmax: &[i64]) -> Result<Option<CoeffTable>> {
    if spec.expr.arity() == 0 {
        let p = spec.eval_reduced(&vec![0.0; spec.dim])?;
        return Ok(Some(CoeffTable::constant(p, kmax)));
    }
    if spec.dim != 1 {
        return Ok(None);
    }
    let k1 = kmax[0];
    if let Some(b) = spec.as_builtin() {
        if b.coeff(0).is_some() {
            return Ok(Some(CoeffTable::from_fn(kmax, Provenance::ClosedForm, |k| {
                b.coeff(k[0]).expect("closed form")
            })));
        }
    }
    if let Some(b) = spec.as_complement_of_builtin() {
        if b.coeff(0).is_some() {
            return Ok(Some(CoeffTable::from_fn(kmax, Provenance::ClosedForm, |k| {
                let delta = if k[0] == 0 { 1.0 } else { 0.0 };
                Complex64::new(delta, 0.0) - b.coeff(k[0]).expect("closed form")
            })));
        }
    }
    if let Some(step) = spec.as_step() {
        return Ok(Some(CoeffTable::from_fn(kmax, Provenance::ClosedForm, |k| step.coeff(k[0]))));
    }
    match &spec.expr {
        Expr::Dilate { factor, inner } => {
            let inner = SymbolSpec::from_expr((**inner).clone(), 1);
            let n = *factor as i64;
            match exact(&inner, &[k1 / n])? {
                Some(t) => Ok(Some(t.dilate(*factor, k1)?)),
                None => Ok(None),
            }
        }
        Expr::Fold { factor, inner } => {
            let inner = SymbolSpec::from_expr((**inner).clone(), 1);
            match exact(&inner, &[k1 * *factor as i64])? {
                Some(t) => Ok(Some(t.subsample_box(&[*factor], kmax)?)),
                None => Ok(None),
            }
        }
        _ => Ok(None),
    }
}

fn quadrature_coeffs(spec: &SymbolSpec, kmax: &[i64], quad: &QuadParams) -> Result<CoeffTable> {
    let d = spec.dim;
    let min_level = kmax.iter().map(|&k| quad::min_level_for(k)).max().unwrap_or(5);
    let max_level = quad.max_level_for(d).max(min_level);
    let r = quad::refine(min_level, max_level, quad.tol_for(d), |level| {
        let n = 1usize << level;
        let v = quad::grid_values(spec, n, |f| f)?;
        Ok(quad::grid_coeffs(&v, n, d, kmax))
    })?;
    if !r.converged {
        return Err(Error::NonConvergent {
            last_delta: r.last_delta,
            level: r.level,
        });
    }
    let provenance = Provenance::Quadrature {
        level: r.level,
        last_delta: r.last_delta,
    };
    let mut i = 0;
    Ok(CoeffTable::from_fn(kmax, provenance, |_| {
        i += 1;
        r.values[i - 1]
    }))
}

fn monte_carlo_coeffs(spec: &SymbolSpec, kmax: &[i64], quad: &QuadParams) -> Result<CoeffTable> {
    let len: usize = kmax.iter().map(|k| (2 * k + 1) as usize).product();
    let dim = spec.dim;
    let kmax_owned = kmax.to_vec();
    let ks: Vec<Vec<i64>> = (0..len)
        .map(|mut idx| {
            let mut k = vec![0i64; dim];
            for j in (0..dim).rev() {
                let w = (2 * kmax_owned[j] + 1) as usize;
                k[j] = (idx % w) as i64 - kmax_owned[j];
                idx /= w;
            }
            k
        })
        .collect();
    let stats = quad::monte_carlo(spec, quad.mc_points, quad.seed, |f, x| {
        let mut out = Vec::with_capacity(2 * ks.len());
        for k in &ks {
            let phase: f64 = k.iter().zip(x).map(|(kj, xj)| *kj as f64 * xj).sum();
            let (s, c) = (2.0 * PI * phase).sin_cos();
            out.push(f * c);
            out.push(-f * s);
        }
        out
    })?;
    let std_err = stats.iter().map(|s| s.1).fold(0.0, f64::max);
    let mut i = 0;
    Ok(CoeffTable::from_fn(
        kmax,
        Provenance::MonteCarlo {
            points: quad.mc_points,
            std_err,
        },
        |_| {
            i += 1;
            Complex64::new(stats[2 * i - 2].0, stats[2 * i - 1].0)
        },
    ))
}

/// Coefficients of the planar spanning-tree symbol via the exact inner integral
///
/// `∫ e^{-2πiky} s/(s + sin²πy) dy = sqrt(s/(1+s)) (sqrt(1+s) - sqrt(s))^{2|k|}`
///
/// with `s = sin²πx`, leaving a one-dimensional quadrature in `x` whose
/// integrand is analytic on `[0,1]`.
fn ust2d_reduced(kmax: &[i64], quad: &QuadParams) -> Result<CoeffTable> {
    let (k1max, k2max) = (kmax[0], kmax[1]);
    let min_level = quad::min_level_for(k1max);
    let max_level = quad.max_level_for(1).max(min_level);
    let tol = quad.tol_for(1);
    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(k2max as usize + 1);
    let mut worst = (0u32, 0.0f64);
    for k2 in 0..=k2max {
        let r = quad::refine(min_level, max_level, tol, |level| {
            let n = 1usize << level;
            let v: Vec<f64> = (0..n)
                .map(|j| {
                    let t = (PI * (j as f64 + 0.5) / n as f64).sin();
                    let s = t * t;
                    let root = (1.0 + s).sqrt();
                    t / root * (root - t).powi(2 * k2 as i32)
                })
                .collect();
            Ok(quad::grid_coeffs(&v, n, 1, &[k1max]))
        })?;
        if !r.converged {
            return Err(Error::NonConvergent {
                last_delta: r.last_delta,
                level: r.level,
            });
        }
        worst = (worst.0.max(r.level), worst.1.max(r.last_delta));
        columns.push(r.values);
    }
    Ok(CoeffTable::from_fn(
        kmax,
        Provenance::Quadrature {
            level: worst.0,
            last_delta: worst.1,
        },
        |k| columns[k[1].unsigned_abs() as usize][(k[0] + k1max) as usize],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::parse_symbol;

    fn close(a: Complex64, b: f64, tol: f64) -> bool {
        (a - Complex64::new(b, 0.0)).norm() < tol
    }

    #[test]
    fn renewal_closed_form() {
        let s = parse_symbol("renewal(0.5)", 1).unwrap();
        let t = fourier_coeffs(&s, &[6], &QuadParams::default()).unwrap();
        for k in -6..=6i64 {
            assert!(close(t.get1(k).unwrap(), 0.5f64.powi(k.abs() as i32) / 3.0, 1e-15));
        }
    }

    #[test]
    fn quadrature_agrees_with_closed_forms() {
        for name in ["renewal(0.5)", "sin2", "zigzag", "poly3", "sin2half", "recip_trig(2, 0.5)"] {
            let s = parse_symbol(name, 1).unwrap();
            let exact = fourier_coeffs(&s, &[5], &QuadParams::default()).unwrap();
            let q = fourier_coeffs(&s, &[5], &QuadParams::forced()).unwrap();
            for k in -5..=5 {
                let d = (exact.get1(k).unwrap() - q.get1(k).unwrap()).norm();
                assert!(d < 1e-9, "{name} k={k} diff {d}");
            }
        }
    }

    #[test]
    fn ust_axis_first_coefficients() {
        let s = parse_symbol("ust_axis_g", 1).unwrap();
        let t = fourier_coeffs(&s, &[4], &QuadParams::default()).unwrap();
        let expect = [
            0.5,
            0.5 - 2.0 / PI,
            2.5 - 8.0 / PI,
            12.5 - 118.0 / (3.0 * PI),
            64.5 - 608.0 / (3.0 * PI),
        ];
        for (k, e) in expect.iter().enumerate() {
            assert!(close(t.get1(k as i64).unwrap(), *e, 1e-10), "k={k}");
        }
    }

    #[test]
    fn ust2d_reduction_matches_axis_symbol_and_grid() {
        let s = SymbolSpec::builtin(Builtin::Ust2d);
        let t = fourier_coeffs(&s, &[3, 3], &QuadParams::default()).unwrap();
        // k2 = 0 column is the line symbol of the horizontal axis
        let g = fourier_coeffs(&parse_symbol("ust_axis_g", 1).unwrap(), &[3], &QuadParams::default()).unwrap();
        for k in -3..=3 {
            assert!((t.get(&[k, 0]).unwrap() - g.get1(k).unwrap()).norm() < 1e-10);
        }
        // diagonal-lag coefficients vanish off the origin (independence along the diagonal)
        for k in 1..=3 {
            assert!(t.get(&[k, k]).unwrap().norm() < 1e-10);
            assert!(t.get(&[k, -k]).unwrap().norm() < 1e-10);
        }
        let mut coarse = QuadParams::forced();
        coarse.max_level = Some(9);
        coarse.tol = Some(1e-3);
        let q = fourier_coeffs(&s, &[3, 3], &coarse).unwrap();
        for (k, v) in t.iter() {
            assert!((v - q.get(&k).unwrap()).norm() < 1e-3, "{k:?}");
        }
    }

    #[test]
    fn dilate_and_fold_tables() {
        let s = parse_symbol("sin2", 1).unwrap();
        let d = fourier_coeffs(&s.mult_arg(2).unwrap(), &[4], &QuadParams::default()).unwrap();
        assert!(close(d.get1(0).unwrap(), 0.5, 1e-15));
        assert!(close(d.get1(2).unwrap(), -0.25, 1e-15));
        assert!(close(d.get1(1).unwrap(), 0.0, 1e-15));
        let f = fourier_coeffs(&s.fold(2).unwrap(), &[3], &QuadParams::default()).unwrap();
        assert!(close(f.get1(0).unwrap(), 0.5, 1e-15));
        assert!(close(f.get1(1).unwrap(), 0.0, 1e-15));
    }

    #[test]
    fn step_function_coefficients() {
        let s = parse_symbol("arc(0,0.5)", 1).unwrap();
        let t = fourier_coeffs(&s, &[5], &QuadParams::default()).unwrap();
        for n in 1..=5i64 {
            let expect = if n % 2 == 1 {
                Complex64::new(0.0, -1.0 / (PI * n as f64))
            } else {
                Complex64::new(0.0, 0.0)
            };
            assert!((t.get1(n).unwrap() - expect).norm() < 1e-15);
        }
    }
}
