//! Fourier coefficient tables, closed form against quadrature, and the on-disk cache.
//!
//! cargo run --example coefficients

use detproc::spectral::{cached_fourier_coeffs, fourier_coeffs, QuadParams};
use detproc::symbol::parse_symbol;

fn main() -> detproc::Result<()> {
    let s = parse_symbol("ust_axis_g", 1)?;
    let closed = fourier_coeffs(&s, &[5], &QuadParams::default())?;
    let quad = fourier_coeffs(&s, &[5], &QuadParams::forced())?;
    println!("{:>3} {:>14} {:>14}", "k", "closed form", "quadrature");
    for k in 0..=5 {
        println!("{k:>3} {:>14.10} {:>14.10}", closed.get1(k)?.re, quad.get1(k)?.re);
    }
    println!("quadrature provenance: {:?}", quad.provenance);

    // two-dimensional tables, cached under a temporary directory
    let dir = std::env::temp_dir().join("detproc-example-cache");
    let planar = parse_symbol("ust2d", 2)?;
    let t = cached_fourier_coeffs(&planar, &[2, 2], &QuadParams::default(), Some(&dir))?;
    for k in [[0, 0], [1, 0], [0, 1], [1, 1], [2, 1]] {
        println!("f^({:>2},{:>2}) = {:+.8}", k[0], k[1], t.get(&k)?.re);
    }
    println!("cached in {}", dir.display());
    Ok(())
}
