mod common;

use common::{jnrd_violation, residue_independence_gap, upsets};
use detproc::kernel::{joint_pmf, line, nu_kernel, Pmf};
use detproc::spectral::{fourier_coeffs, outer_coeffs, CoeffTable, QuadParams};
use detproc::symbol::{parse_symbol, Point, SymbolSpec};
use proptest::prelude::*;

/// `c + a cos 2πx + b sin 4πx` with `|a| + |b| < min(c, 1-c)`, so values stay in (0,1).
fn trig_symbol() -> impl Strategy<Value = String> {
    (0.2f64..0.8, -1.0f64..1.0, 0.0f64..1.0).prop_map(|(c, u, v)| {
        let room = 0.95 * c.min(1.0 - c);
        let a = u * room * v;
        let b = (1.0 - v) * room * u.signum();
        format!("{c} + {a}*cos(2*pi*x1) + {b}*sin(4*pi*x1)")
    })
}

fn sym(text: &str) -> SymbolSpec {
    parse_symbol(text, 1).unwrap()
}

fn tab(text: &str, kmax: i64) -> CoeffTable {
    fourier_coeffs(&sym(text), &[kmax], &QuadParams::default()).unwrap()
}

fn law(text: &str, m: i64) -> Pmf {
    joint_pmf(&tab(text, m), &line(0..m)).unwrap()
}

fn max_gap(a: &Pmf, b: &Pmf) -> f64 {
    a.probs.iter().zip(&b.probs).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn printed_symbols_reparse_to_the_same_function(
        c in 0.1f64..0.9, k in 1u32..4, t in 0.0f64..1.0, which in 0usize..4,
    ) {
        let text = match which {
            0 => format!("{c}*sin(pi*x1)^2"),
            1 => format!("{c}*arc(0.1, 0.6) + {}", (1.0 - c) / 2.0),
            2 => format!("dilate({k}, {c}*cos(pi*x1)^2)"),
            _ => format!("abs(sin({k}*pi*x1))*{c}"),
        };
        let s = sym(&text);
        let again = sym(&s.to_string());
        let p = Point::new(vec![t]);
        prop_assert!((s.eval(&p).unwrap() - again.eval(&p).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn builtins_match_their_expressions(a in 0.05f64..0.9, t in 0.0f64..1.0) {
        let pairs = [
            ("sin2".to_string(), "sin(pi*x1)^2".to_string()),
            ("poly3".to_string(), "(3 + 4*cos(2*pi*x1) + 2*cos(4*pi*x1))/9".to_string()),
            (format!("renewal({a})"), format!("(1-{a})^2/(1 - 2*{a}*cos(2*pi*x1) + {a}^2)")),
        ];
        for (b, e) in &pairs {
            let p = Point::new(vec![t]);
            prop_assert!((sym(b).eval(&p).unwrap() - sym(e).eval(&p).unwrap()).abs() < 1e-12);
            let (tb, te) = (tab(b, 4), tab(e, 4));
            for k in -4..=4 {
                prop_assert!((tb.get1(k).unwrap() - te.get1(k).unwrap()).norm() < 1e-8, "{b} k={k}");
            }
        }
    }

    #[test]
    fn pair_correlations_are_negative(text in trig_symbol(), gap in 1i64..5) {
        let t = tab(&text, gap);
        let p = joint_pmf(&t, &line([0, gap])).unwrap();
        let f0 = t.mean();
        let cov = p.prob(&[true, true]) - f0 * f0;
        prop_assert!((cov + t.get1(gap).unwrap().norm_sqr()).abs() < 1e-10);
        prop_assert!(cov <= 1e-12);
    }

    #[test]
    fn jnrd_on_small_windows(text in trig_symbol(), len in 2i64..6) {
        let ups: Vec<_> = (0..=4).map(upsets).collect();
        prop_assert!(jnrd_violation(&law(&text, len), &ups) < 1e-10);
    }

    #[test]
    fn complement_is_the_flipped_process(text in trig_symbol()) {
        let p = law(&text, 6);
        let c = law(&format!("1 - ({text})"), 6);
        prop_assert!(max_gap(&p.flipped(), &c) < 1e-10);
    }

    #[test]
    fn larger_symbols_dominate(text in trig_symbol(), d in 0.05f64..0.9) {
        let ups = upsets(4);
        let lo = law(&text, 4);
        let hi = law(&format!("({text}) + {d}*(1 - ({text}))"), 4);
        for u in &ups {
            let mass = |p: &Pmf| (0..16).filter(|&x| u[x]).map(|x| p.probs[x]).sum::<f64>();
            prop_assert!(mass(&lo) <= mass(&hi) + 1e-10);
        }
    }

    #[test]
    fn full_support(text in trig_symbol(), len in 1i64..7) {
        prop_assert!(law(&text, len).probs.iter().all(|&p| p > 0.0));
    }

    #[test]
    fn thinning_is_multiplying_the_symbol(text in trig_symbol(), p in 0.05f64..1.0) {
        let thinned = law(&text, 6).thinned(p);
        let scaled = law(&format!("{p}*({text})"), 6);
        prop_assert!(max_gap(&thinned, &scaled) < 1e-10);
    }

    #[test]
    fn nu_kernel_is_a_contraction(text in trig_symbol(), m in 1usize..10) {
        let outer = outer_coeffs(&sym(&text), m, &QuadParams::default()).unwrap();
        let k = nu_kernel(&outer, m).unwrap();
        for e in k.eigenvalues() {
            prop_assert!((-1e-10..=1.0 + 1e-10).contains(&e), "eigenvalue {e}");
        }
    }

    #[test]
    fn dilated_symbols_split_into_residue_classes(text in trig_symbol(), n in 2u32..4) {
        prop_assert!(residue_independence_gap(&text, n, 2) < 1e-10);
    }

    #[test]
    fn subsampled_table_is_the_folded_symbol(text in trig_symbol(), r in 2u32..4) {
        let big = tab(&text, 4 * r as i64);
        let sub = big.subsample(&[r]).unwrap();
        let folded = fourier_coeffs(&sym(&text).fold(r).unwrap(), &[4], &QuadParams::default()).unwrap();
        for k in -4..=4 {
            prop_assert!((sub.get1(k).unwrap() - folded.get1(k).unwrap()).norm() < 1e-10);
        }
    }

    #[test]
    fn translation_invariance(text in trig_symbol(), shift in -5i64..5) {
        let t = tab(&text, 3);
        let a = joint_pmf(&t, &line([0, 1, 3])).unwrap();
        let b = joint_pmf(&t, &line([shift, shift + 1, shift + 3])).unwrap();
        prop_assert!(max_gap(&a, &b) < 1e-14);
    }
}

#[test]
fn even_sites_of_half_period_symbols_are_independent() {
    for text in ["sin2", "arc(0,0.5)", "0.5 + 0.3*cos(2*pi*x1)"] {
        let t = tab(text, 10);
        let p = joint_pmf(&t, &line([0, 2, 4, 6, 8])).unwrap();
        let f0 = t.mean();
        for (idx, q) in p.probs.iter().enumerate() {
            let k = idx.count_ones() as i32;
            assert!((q - f0.powi(k) * (1.0 - f0).powi(5 - k)).abs() < 1e-10, "{text}");
        }
    }
}

#[test]
fn jnrd_check_flags_positive_correlation() {
    let ups: Vec<_> = (0..=4).map(upsets).collect();
    let coupled = Pmf {
        window: line([0, 1]),
        probs: vec![0.5, 0.0, 0.0, 0.5],
    };
    assert!(jnrd_violation(&coupled, &ups) > 0.9);
}
