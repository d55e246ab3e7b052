//! Exact sampling on a window, empirical statistics, thinning and export.
//!
//! cargo run --release --example sampling

use detproc::kernel::{joint_pmf, line};
use detproc::sampling::{empirical_stats, sample_batch, thin};
use detproc::spectral::{fourier_coeffs, QuadParams};
use detproc::symbol::parse_symbol;

fn main() -> detproc::Result<()> {
    let t = fourier_coeffs(&parse_symbol("renewal(0.5)", 1)?, &[6], &QuadParams::default())?;
    let w = line(0..6);
    let batch = sample_batch(&t, &w, 20_000, 42)?;

    let exact = joint_pmf(&t, &w)?;
    println!("TV(empirical, exact) = {:.4}", batch.empirical_pmf()?.total_variation(&exact));

    let stats = empirical_stats(&batch)?;
    println!("density at 0: {:.4} ± {:.4} (exact {:.4})", stats.frequencies[0].value, stats.frequencies[0].se, t.mean());
    let c = stats.covariances[0][1];
    println!("lag-1 covariance: {:.4} ± {:.4} (exact {:.4})", c.value, c.se, -t.get1(1)?.norm_sqr());

    let thinned = thin(&batch, 0.5, 7)?;
    let d = empirical_stats(&thinned)?.frequencies[0].value;
    println!("after keeping each one with probability 1/2: density {d:.4}");

    let stem = std::env::temp_dir().join("detproc-renewal-samples");
    batch.export(&stem)?;
    println!("wrote {}.csv and {}.json", stem.display(), stem.display());
    Ok(())
}
