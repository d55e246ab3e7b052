//! Uniform spanning trees of the torus compared with the edge-process symbols.
//!
//! cargo run --release --example spanning_trees

use detproc::spectral::QuadParams;
use detproc::ust::{compare_to_symbol, process_table, ust_samples_multi, wilson_ust, EdgeProcess};

fn main() -> detproc::Result<()> {
    let tree = wilson_ust(16, 0)?;
    println!("16-torus tree: {} edges, spanning = {}", tree.edge_count(), tree.is_spanning_tree());

    let kinds = [EdgeProcess::Field, EdgeProcess::XAxis, EdgeProcess::Diagonal, EdgeProcess::Zigzag];
    let sets = ust_samples_multi(32, 2000, 1, &kinds)?;
    for s in &sets {
        let lag = vec![1; s.kind.dim()];
        let table = process_table(s.kind, 2, &QuadParams::default())?;
        let rep = compare_to_symbol(s, &table, &[lag], 0.01)?;
        let l = &rep.lags[0];
        println!(
            "{:<9?} mean {:.4} (f^(0) = {:.4})  lag-1 cov {:+.5} ± {:.5} (predicted {:+.5})  {}",
            s.kind,
            rep.mean.empirical,
            rep.mean.predicted,
            l.empirical,
            l.se,
            l.predicted,
            if rep.pass() { "pass" } else { "FAIL" }
        );
    }
    Ok(())
}
