//! Arithmetic, geometric and harmonic means and the domination constants they give.
//!
//! cargo run --release --example means_and_domination

use detproc::phase::domination_report;
use detproc::spectral::{means, QuadParams};
use detproc::symbol::parse_symbol;

fn main() -> detproc::Result<()> {
    let quad = QuadParams::default();
    for (text, dim) in [("sin2", 1), ("ust_axis_g", 1), ("renewal(0.3)", 1), ("arc(0,0.5)", 1), ("ust2d", 2)] {
        let m = means(&parse_symbol(text, dim)?, &quad)?;
        let d = domination_report(&m);
        println!(
            "{text:<13} GM {:.6}  HM {:.6}  strong [{:.6}, {:.6}]  full [{:.6}, {:.6}]",
            m.gm.value, m.hm.value, d.p_strong.value, d.q_strong.value, d.p_full.value, d.q_full.value
        );
    }
    Ok(())
}
