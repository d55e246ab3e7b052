//! Exact pattern law on a window, marginals, entropy and CSV export.
//!
//! cargo run --example joint_law

use detproc::kernel::{joint_pmf, line};
use detproc::spectral::{fourier_coeffs, QuadParams};
use detproc::symbol::parse_symbol;

fn main() -> detproc::Result<()> {
    let t = fourier_coeffs(&parse_symbol("poly3", 1)?, &[4], &QuadParams::default())?;
    let pmf = joint_pmf(&t, &line(0..4))?;
    let mut rows: Vec<(String, f64)> = (0..pmf.probs.len()).map(|i| (pmf.pattern_string(i), pmf.probs[i])).collect();
    rows.sort_by(|a, b| b.1.total_cmp(&a.1));
    for (pattern, p) in rows.iter().take(6) {
        println!("{pattern}  {p:.6}");
    }
    println!("entropy of 4 sites: {:.6} nats", pmf.entropy());
    println!("P[1 at 0 and 3]: {:.6}", pmf.marginal(&[0, 3]).prob(&[true, true]));

    let mut csv = Vec::new();
    pmf.write_csv(&mut csv)?;
    println!("{}", String::from_utf8_lossy(&csv).lines().take(3).collect::<Vec<_>>().join("\n"));
    Ok(())
}
