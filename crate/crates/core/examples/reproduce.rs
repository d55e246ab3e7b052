//! Runs part of the reproduction table from library code.
//!
//! cargo run --release --example reproduce

use detproc::cli::repro_line;
use detproc::cli::reproduce::{parse_table, run_table, TABLE};

fn main() -> detproc::Result<()> {
    let rows = parse_table(TABLE)?;
    let quick: Vec<String> = rows
        .iter()
        .filter(|r| !r.id.starts_with("ust-") && !r.id.starts_with("sampler-") && r.id != "delete-ustd4")
        .map(|r| r.id.clone())
        .collect();
    for r in run_table(&rows, &quick)? {
        println!("{}", repro_line(&r));
    }
    Ok(())
}
