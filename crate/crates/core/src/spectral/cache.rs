//! Plain-text cache of coefficient tables.
//!
//! One file per key, named `<key>.coeffs`:
//!
//! ```text
//! detproc-coeffs v1
//! symbol d=1;renewal(0.5)
//! quad tol=1e-10;max=20;mc=10000000;seed=0;closed=true
//! kmax 4
//! provenance {"kind":"closed-form"}
//! -4 0.004166666666666667 0
//! ...
//! ```
//!
//! Each entry line holds the lattice vector followed by the real and
//! imaginary parts, printed with round-trip precision.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use super::coeffs::fourier_coeffs;
use super::quad::QuadParams;
use super::table::{CoeffTable, Provenance};
use crate::error::{Error, Result};
use crate::symbol::SymbolSpec;

pub const HEADER: &str = "detproc-coeffs v1";
pub const CACHE_ENV: &str = "DETPROC_CACHE_DIR";

/// Content hash of everything that determines a table.
pub fn cache_key(spec: &SymbolSpec, kmax: &[i64], quad: &QuadParams) -> String {
    let mut h = Sha256::new();
    h.update(spec.content_key().as_bytes());
    h.update(format!("|kmax={kmax:?}|").as_bytes());
    h.update(quad.key(spec.dim).as_bytes());
    hex::encode(h.finalize())
}

/// The cache directory: the explicit one, else the environment variable.
pub fn resolve_dir(explicit: Option<&Path>) -> Option<PathBuf> {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
}

pub fn write_table(table: &CoeffTable, symbol: &str, quad_key: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{HEADER}");
    let _ = writeln!(s, "symbol {symbol}");
    let _ = writeln!(s, "quad {quad_key}");
    let kmax: Vec<String> = table.kmax.iter().map(|k| k.to_string()).collect();
    let _ = writeln!(s, "kmax {}", kmax.join(" "));
    let prov = serde_json::to_string(&table.provenance).expect("provenance serialises");
    let _ = writeln!(s, "provenance {prov}");
    for (k, c) in table.iter() {
        let ks: Vec<String> = k.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{} {:?} {:?}", ks.join(" "), c.re, c.im);
    }
    s
}

pub fn read_table(text: &str) -> Result<CoeffTable> {
    let bad = |m: &str| Error::Io(format!("malformed coefficient cache: {m}"));
    let mut lines = text.lines();
    if lines.next() != Some(HEADER) {
        return Err(bad("missing header"));
    }
    let mut kmax: Option<Vec<i64>> = None;
    let mut provenance: Option<Provenance> = None;
    let mut entries = std::collections::HashMap::new();
    for line in lines {
        if let Some(rest) = line.strip_prefix("kmax ") {
            kmax = Some(
                rest.split_whitespace()
                    .map(|t| t.parse().map_err(|_| bad("kmax")))
                    .collect::<Result<_>>()?,
            );
        } else if let Some(rest) = line.strip_prefix("provenance ") {
            provenance = Some(serde_json::from_str(rest).map_err(|_| bad("provenance"))?);
        } else if line.starts_with("symbol ") || line.starts_with("quad ") || line.is_empty() {
            continue;
        } else {
            let dim = kmax.as_ref().ok_or_else(|| bad("entries before kmax"))?.len();
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != dim + 2 {
                return Err(bad("entry width"));
            }
            let k: Vec<i64> = toks[..dim]
                .iter()
                .map(|t| t.parse().map_err(|_| bad("index")))
                .collect::<Result<_>>()?;
            let re: f64 = toks[dim].parse().map_err(|_| bad("value"))?;
            let im: f64 = toks[dim + 1].parse().map_err(|_| bad("value"))?;
            entries.insert(k, Complex64::new(re, im));
        }
    }
    let kmax = kmax.ok_or_else(|| bad("kmax"))?;
    let provenance = provenance.ok_or_else(|| bad("provenance"))?;
    let expected: usize = kmax.iter().map(|k| (2 * k + 1) as usize).product();
    if entries.len() != expected {
        return Err(bad("entry count"));
    }
    Ok(CoeffTable::from_fn(&kmax, provenance, |k| entries[k]))
}

/// [`fourier_coeffs`] with a read-through cache in `dir` (or the
/// environment's cache directory). Unreadable cache files are recomputed.
pub fn cached_fourier_coeffs(
    spec: &SymbolSpec,
    kmax: &[i64],
    quad: &QuadParams,
    dir: Option<&Path>,
) -> Result<CoeffTable> {
    let Some(dir) = resolve_dir(dir) else {
        return fourier_coeffs(spec, kmax, quad);
    };
    let path = dir.join(format!("{}.coeffs", cache_key(spec, kmax, quad)));
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(t) = read_table(&text) {
            return Ok(t);
        }
    }
    let table = fourier_coeffs(spec, kmax, quad)?;
    std::fs::create_dir_all(&dir)?;
    std::fs::write(&path, write_table(&table, &spec.content_key(), &quad.key(spec.dim)))?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::parse_symbol;

    #[test]
    fn round_trip_through_cache_dir() {
        let dir = tempfile::tempdir().unwrap();
        let s = parse_symbol("ust2d", 2).unwrap();
        let q = QuadParams::default();
        let a = cached_fourier_coeffs(&s, &[2, 1], &q, Some(dir.path())).unwrap();
        let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(files.len(), 1);
        let b = cached_fourier_coeffs(&s, &[2, 1], &q, Some(dir.path())).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn key_depends_on_quad_params() {
        let s = parse_symbol("sin2", 1).unwrap();
        let a = cache_key(&s, &[3], &QuadParams::default());
        let b = cache_key(&s, &[3], &QuadParams::forced());
        assert_ne!(a, b);
    }
}
