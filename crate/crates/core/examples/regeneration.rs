//! Regeneration after runs of ones, and the renewal identities.
//!
//! cargo run --release --example regeneration

use detproc::phase::{regeneration_test, renewal_checks};
use detproc::spectral::{fourier_coeffs, QuadParams};
use detproc::symbol::parse_symbol;

fn main() -> detproc::Result<()> {
    let quad = QuadParams::default();
    for (text, n) in [("renewal(0.5)", 1), ("recip_trig(3, 0.5, 0.25)", 2), ("recip_trig(3, 0.5, 0.25)", 1), ("sin2", 2)] {
        let t = fourier_coeffs(&parse_symbol(text, 1)?, &[(n + 8) as i64], &quad)?;
        let r = regeneration_test(&t, n, 4)?;
        println!("{text:<26} run {n}: max |P[b | R, a] - P[b | R]| = {:.2e}", r.max_residual);
    }
    for a in [0.2, 0.5, 0.8] {
        let rep = renewal_checks(a)?;
        for c in &rep.checks {
            println!("a = {a}: {:<20} {:.1e} {}", c.name, c.max_error, if c.pass { "ok" } else { "FAIL" });
        }
    }
    Ok(())
}
