//! One-sided and two-sided phase verdicts, with the annulus probe.
//!
//! cargo run --release --example phase_uniqueness

use detproc::phase::{annulus_probe, phase_verdict};
use detproc::spectral::{fourier_coeffs, means, outer_coeffs, QuadParams};
use detproc::symbol::parse_symbol;

fn main() -> detproc::Result<()> {
    let quad = QuadParams::default();
    for text in ["sin2", "arc(0,0.5)", "renewal(0.5)", "0.5*exp(-1/sqrt(abs(x1 - 0.5)))"] {
        let s = parse_symbol(text, 1)?;
        let report = means(&s, &quad)?;
        let f = outer_coeffs(&s, 16, &quad)?;
        let c = outer_coeffs(&s.complement(), 16, &quad)?;
        let v = phase_verdict(&s, &report, &f, &c, 16)?;
        println!(
            "{text:<34} strong K {:?}  strong full K {:?} ({:?})",
            v.strong_k.verdict, v.strong_full_k.verdict, v.strong_full_k.justification
        );
    }

    // conditional one-probability given zeros on an annulus, as the annulus grows
    let t = fourier_coeffs(&parse_symbol("sin2", 1)?, &[24], &quad)?;
    for big in [3, 6, 12] {
        println!("annulus 2..{big}: {:.6}", annulus_probe(&t, 2, big)?);
    }
    Ok(())
}
