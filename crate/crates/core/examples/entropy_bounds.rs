//! Entropy intervals: refined bounds, block bounds, the GM lower bound, the
//! exact renewal entropy, and transfer to a nearby symbol.
//!
//! cargo run --release --example entropy_bounds

use detproc::entropy::{
    block_upper_bound, gm_lower_bound, perturbation_transfer, refined_bounds, renewal_entropy,
};
use detproc::spectral::{fourier_coeffs, means, QuadParams};
use detproc::symbol::parse_symbol;

fn main() -> detproc::Result<()> {
    let quad = QuadParams::default();
    let sin2 = parse_symbol("sin2", 1)?;
    for m in [2, 6, 10, 14] {
        let iv = refined_bounds(&sin2, m, &quad)?;
        println!("sin2, m = {m:>2}: [{:.9}, {:.9}] width {:.1e}", iv.lo, iv.hi, iv.width());
    }

    let axis = parse_symbol("ust_axis_g", 1)?;
    let block = block_upper_bound(&fourier_coeffs(&axis, &[12], &quad)?, &[12])?;
    let gm = gm_lower_bound(&means(&axis, &quad)?);
    println!("ust_axis_g: GM bound {gm:.6} <= H <= block bound {block:.6}");

    let a = 0.5;
    let iv = refined_bounds(&parse_symbol(&format!("renewal({a})"), 1)?, 10, &quad)?;
    println!("renewal(1/2): exact {:.9} inside [{:.9}, {:.9}]", renewal_entropy(a, 1e-13)?, iv.lo, iv.hi);

    // the indicator of half the circle has GM 0 on both sides; bound it through a perturbation
    let f = parse_symbol("arc(0,0.5)", 1)?;
    let g = parse_symbol("0.98*arc(0,0.5) + 0.01", 1)?;
    let direct = refined_bounds(&f, 3, &quad)?;
    let moved = perturbation_transfer(&refined_bounds(&g, 3, &quad)?, &f, &g, &quad)?;
    println!("arc(0,1/2): direct [{:.4}, {:.4}] uninformative = {}", direct.lo, direct.hi, direct.uninformative);
    println!("arc(0,1/2): via the perturbed symbol, H >= {:.6} ({:.6} bits)", moved.lo, moved.in_bits().lo);
    Ok(())
}
