//! Symbol definitions loaded from a TOML key-value file.
//!
//! ```toml
//! [[symbol]]
//! name = "diff"
//! dim = 1
//! expression = "0.5*exp(-1/sqrt(abs(x - 0.5)))"
//!
//! [[symbol.zero_profile]]
//! side = "f"
//! location = "isolated-point"
//! order = "flat"
//! ```
//!
//! Either `expression` or `builtin` must be present. When `zero_profile` is
//! omitted a bare builtin keeps its own declared profile.

use std::path::Path;

use serde::Deserialize;

use super::profile::{Side, VanishingOrder, ZeroEntry, ZeroLocation, ZeroProfile};
use super::{parse_symbol, SymbolSpec};
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
struct File {
    #[serde(default)]
    symbol: Vec<Entry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    name: String,
    #[serde(default = "one")]
    dim: usize,
    expression: Option<String>,
    builtin: Option<String>,
    zero_profile: Option<Vec<ProfileEntry>>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Deserialize)]
struct ProfileEntry {
    side: Side,
    location: ZeroLocation,
    order: Order,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Order {
    Finite(u32),
    Word(String),
}

fn order(o: Order) -> Result<VanishingOrder> {
    match o {
        Order::Finite(n) => Ok(VanishingOrder::Finite(n)),
        Order::Word(w) if w == "flat" || w == "exponential" => Ok(VanishingOrder::Flat),
        Order::Word(w) => Err(Error::Config(format!("unknown vanishing order `{w}`"))),
    }
}

/// Parses every `[[symbol]]` table in `text`.
pub fn parse_symbols(text: &str) -> Result<Vec<SymbolSpec>> {
    let file: File = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    file.symbol.into_iter().map(entry_to_spec).collect()
}

pub fn load_symbols(path: &Path) -> Result<Vec<SymbolSpec>> {
    let text = std::fs::read_to_string(path)?;
    parse_symbols(&text)
}

/// Loads the symbol called `name` from `path`.
pub fn load_symbol(path: &Path, name: &str) -> Result<SymbolSpec> {
    load_symbols(path)?
        .into_iter()
        .find(|s| s.name.as_deref() == Some(name))
        .ok_or_else(|| Error::Config(format!("no symbol named `{name}` in {}", path.display())))
}

fn entry_to_spec(e: Entry) -> Result<SymbolSpec> {
    let text = match (e.expression, e.builtin) {
        (Some(x), None) | (None, Some(x)) => x,
        _ => {
            return Err(Error::Config(format!(
                "symbol `{}` needs exactly one of `expression` or `builtin`",
                e.name
            )))
        }
    };
    let mut spec = parse_symbol(&text, e.dim)?.with_name(e.name);
    if let Some(entries) = e.zero_profile {
        let entries = entries
            .into_iter()
            .map(|p| {
                Ok(ZeroEntry {
                    side: p.side,
                    location: p.location,
                    order: order(p.order)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        spec.zero_profile = Some(ZeroProfile { entries });
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_expression_with_profile() {
        let text = r#"
[[symbol]]
name = "diff"
dim = 1
expression = "0.5*exp(-1/sqrt(abs(x - 0.5)))"

[[symbol.zero_profile]]
side = "f"
location = "isolated-point"
order = "flat"

[[symbol]]
name = "r"
builtin = "renewal(0.25)"
"#;
        let syms = parse_symbols(text).unwrap();
        assert_eq!(syms.len(), 2);
        let p = syms[0].zero_profile.as_ref().unwrap();
        assert_eq!(p.entries[0].order, VanishingOrder::Flat);
        assert!(syms[1].zero_profile.is_some());
        assert_eq!(syms[1].name.as_deref(), Some("r"));
    }

    #[test]
    fn rejects_both_expression_and_builtin() {
        let text = "[[symbol]]\nname='a'\nexpression='0.5'\nbuiltin='sin2'\n";
        assert!(matches!(parse_symbols(text), Err(Error::Config(_))));
    }

    #[test]
    fn finite_order_and_unknown_order() {
        let ok = "[[symbol]]\nname='a'\nexpression='sin2'\n[[symbol.zero_profile]]\nside='one-minus-f'\nlocation='algebraic-curve'\norder=3\n";
        let s = parse_symbols(ok).unwrap();
        assert_eq!(
            s[0].zero_profile.as_ref().unwrap().entries[0].order,
            VanishingOrder::Finite(3)
        );
        let bad = ok.replace("order=3", "order='weird'");
        assert!(parse_symbols(&bad).is_err());
    }
}
