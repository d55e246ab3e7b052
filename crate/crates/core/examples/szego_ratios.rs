//! Ratios of Toeplitz determinants approaching the geometric mean.
//!
//! cargo run --example szego_ratios

use detproc::spectral::{fourier_coeffs, means, szego_ratio_gm, QuadParams};
use detproc::symbol::parse_symbol;

fn main() -> detproc::Result<()> {
    for text in ["sin2", "renewal(0.5)", "poly3"] {
        let s = parse_symbol(text, 1)?;
        let gm = means(&s, &QuadParams::default())?.gm.value;
        let r = szego_ratio_gm(&fourier_coeffs(&s, &[80], &QuadParams::default())?, 80)?;
        let show: Vec<String> = [1, 5, 20, 40, 80]
            .iter()
            .filter_map(|&n| r.ratios.get(n).map(|v| format!("n={n}: {v:.5}")))
            .collect();
        println!("{text:<13} GM {gm:.5}  {}{}", show.join("  "), if r.truncated { "  (truncated)" } else { "" });
    }
    Ok(())
}
