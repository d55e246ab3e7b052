#![allow(dead_code)]

use detproc::kernel::{joint_pmf, Pmf, Site};
use detproc::spectral::{fourier_coeffs, CoeffTable, QuadParams};
use detproc::symbol::{parse_symbol, SymbolSpec};

pub fn spec(text: &str) -> SymbolSpec {
    parse_symbol(text, 1).unwrap()
}

pub fn table(text: &str, kmax: i64) -> CoeffTable {
    fourier_coeffs(&spec(text), &[kmax], &QuadParams::default()).unwrap()
}

pub fn pmf(text: &str, window: &[i64]) -> Pmf {
    let spread = window.iter().max().unwrap() - window.iter().min().unwrap();
    let w: Vec<Site> = window.iter().map(|&x| vec![x]).collect();
    joint_pmf(&table(text, spread.max(1)), &w).unwrap()
}

/// Binary entropy in nats.
pub fn h(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.ln() - (1.0 - p) * (1.0 - p).ln()
}

/// Catalan's constant from the alternating series, averaging consecutive partial sums.
pub fn catalan() -> f64 {
    let mut s = 0.0;
    let mut prev = 0.0;
    for k in 0..2_000_000u64 {
        prev = s;
        let t = 1.0 / ((2 * k + 1) as f64).powi(2);
        s += if k % 2 == 0 { t } else { -t };
    }
    0.5 * (s + prev)
}

/// Lanczos approximation (g = 7, n = 9).
pub fn gamma(x: f64) -> f64 {
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let mut a = C[0];
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// `∫_0^∞ (e^{-t} I_0(t))^3 dt`, one third of Watson's simple cubic lattice
/// integral, from the Gamma-function closed form of the latter.
pub fn watson_simple_cubic() -> f64 {
    let pi = std::f64::consts::PI;
    6f64.sqrt() / (96.0 * pi.powi(3))
        * gamma(1.0 / 24.0)
        * gamma(5.0 / 24.0)
        * gamma(7.0 / 24.0)
        * gamma(11.0 / 24.0)
}

/// All up-closed subsets of `{0,1}^r`, each as a membership mask over the `2^r` points.
pub fn upsets(r: usize) -> Vec<Vec<bool>> {
    let pts = 1usize << r;
    let mut out = Vec::new();
    for set in 0u64..(1u64 << pts) {
        let member = |x: usize| set >> x & 1 == 1;
        let closed = (0..pts).all(|x| !member(x) || (0..r).all(|i| member(x | 1 << i)));
        if closed {
            out.push((0..pts).map(member).collect());
        }
    }
    out
}

/// Largest violation of joint negative regression dependence on a window:
/// for every split into a conditioned set `S` and the rest `R`, and patterns
/// `a <= b` on `S`, the law of `R` given `b` must be dominated by the law given `a`.
pub fn jnrd_violation(p: &Pmf, ups: &[Vec<Vec<bool>>]) -> f64 {
    let w = p.len();
    let mut worst: f64 = 0.0;
    for s_mask in 1usize..(1 << w) - 1 {
        let s: Vec<usize> = (0..w).filter(|i| s_mask >> i & 1 == 1).collect();
        let r: Vec<usize> = (0..w).filter(|i| s_mask >> i & 1 == 0).collect();
        // conditional laws of R indexed by the pattern on S
        let mut cond = vec![vec![0.0; 1 << r.len()]; 1 << s.len()];
        for (idx, &q) in p.probs.iter().enumerate() {
            let a = s.iter().enumerate().fold(0, |acc, (j, &i)| acc | (idx >> i & 1) << j);
            let b = r.iter().enumerate().fold(0, |acc, (j, &i)| acc | (idx >> i & 1) << j);
            cond[a][b] += q;
        }
        let totals: Vec<f64> = cond.iter().map(|row| row.iter().sum()).collect();
        for a in 0..cond.len() {
            for b in 0..cond.len() {
                if a == b || a & b != a || totals[a] < 1e-12 || totals[b] < 1e-12 {
                    continue;
                }
                for up in &ups[r.len()] {
                    let pa: f64 = (0..up.len()).filter(|&x| up[x]).map(|x| cond[a][x]).sum::<f64>() / totals[a];
                    let pb: f64 = (0..up.len()).filter(|&x| up[x]).map(|x| cond[b][x]).sum::<f64>() / totals[b];
                    worst = worst.max(pb - pa);
                }
            }
        }
    }
    worst
}

/// Largest gap between the law on sites `0..n*len` of the dilated symbol and the
/// product of `n` copies of the original law on `0..len`, one per residue class.
pub fn residue_independence_gap(text: &str, n: u32, len: usize) -> f64 {
    let base = pmf(text, &(0..len as i64).collect::<Vec<_>>());
    let dil = spec(text).mult_arg(n).unwrap();
    let total = n as usize * len;
    let t = fourier_coeffs(&dil, &[total as i64], &QuadParams::default()).unwrap();
    let w: Vec<Site> = (0..total as i64).map(|x| vec![x]).collect();
    let p = joint_pmf(&t, &w).unwrap();
    let mut worst: f64 = 0.0;
    for (idx, &q) in p.probs.iter().enumerate() {
        let mut prod = 1.0;
        for c in 0..n as usize {
            let sub = (0..len).fold(0, |acc, j| acc | (idx >> (c + j * n as usize) & 1) << j);
            prod *= base.probs[sub];
        }
        worst = worst.max((q - prod).abs());
    }
    worst
}
