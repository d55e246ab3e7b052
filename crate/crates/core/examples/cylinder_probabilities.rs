//! Cylinder probabilities, conditional probabilities and the Szegő infimum.
//!
//! cargo run --example cylinder_probabilities

use detproc::kernel::{cond_prob, line, prob_cylinder, prob_ones, szego_inf, CylinderEvent};
use detproc::spectral::{fourier_coeffs, QuadParams};
use detproc::symbol::parse_symbol;

fn main() -> detproc::Result<()> {
    let t = fourier_coeffs(&parse_symbol("sin2", 1)?, &[8], &QuadParams::default())?;

    println!("P[1 at 0]         = {:.6}", prob_ones(&t, &line([0]))?);
    println!("P[1 at 0 and 1]   = {:.6}", prob_ones(&t, &line([0, 1]))?);
    let ev = CylinderEvent::on_line(&[0, 2], &[1])?;
    println!("P[1 0 1]          = {:.6}", prob_cylinder(&t, &ev)?);

    // P[η(0) = 1 | ones on -m..-1] decreases to the Szegő infimum over the half line
    for m in [1, 2, 4, 8] {
        let past = CylinderEvent::on_line(&(-m..0).collect::<Vec<_>>(), &[])?;
        let given = cond_prob(&t, &vec![0], &past)?;
        let inf = szego_inf(&t, &line(-m..0))?;
        println!("m = {m}: P[1 | past ones] = {given:.6}, Szegő projection = {inf:.6}");
    }
    Ok(())
}
