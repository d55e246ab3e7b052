//! Parsing symbols: builtins, expressions, and a TOML definition file.
//!
//! cargo run --example symbols

use detproc::symbol::config::parse_symbols;
use detproc::symbol::{parse_symbol, Point};

fn main() -> detproc::Result<()> {
    for text in ["sin2", "poly3", "renewal(0.5)", "0.98*arc(0,0.5) + 0.01", "1 - sin(pi*x1)^4"] {
        let s = parse_symbol(text, 1)?;
        let v = s.eval(&Point::new(vec![0.3]))?;
        println!("{:<28} f(0.3) = {v:.6}   complement prints as {}", s.label(), s.complement());
    }

    let planar = parse_symbol("ust2d", 2)?;
    println!("ust2d at (0.25, 0.5) = {:.6}", planar.eval(&Point::new(vec![0.25, 0.5]))?);

    // symbols can also come from a config file
    let defs = parse_symbols(
        r#"
        [[symbol]]
        name = "bump"
        expression = "0.5 + 0.4*cos(2*pi*x1)"

        [[symbol]]
        name = "tree"
        dim = 2
        builtin = "ust2d"
        "#,
    )?;
    for s in defs {
        println!("{} (d = {}): {}", s.label(), s.dim, s);
    }

    if let Err(e) = parse_symbol("sin(pi*x2)", 1) {
        println!("rejected: {e}");
    }
    Ok(())
}
