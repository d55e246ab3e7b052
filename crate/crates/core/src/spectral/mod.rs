//! Fourier analysis of symbols: coefficient tables, means, log-coefficients
//! and outer functions.

pub mod cache;
mod coeffs;
mod means;
mod outer;
pub mod quad;
mod table;

pub use cache::cached_fourier_coeffs;
pub use coeffs::fourier_coeffs;
pub use means::{means, MeanValue, MeansReport, GM_DIVERGENCE, HM_DIVERGENCE};
pub use outer::{log_half_coeffs, outer_coeffs, szego_ratio_gm, OuterSeries, SzegoRatios, DET_TOL};
pub use quad::QuadParams;
pub use table::{CoeffTable, Provenance};

use crate::error::Result;
use crate::symbol::SymbolSpec;

/// Table of the averaged symbol `f_r`: `f^_r(k) = f^(r k)`.
pub fn subsample(table: &CoeffTable, r: &[u32]) -> Result<CoeffTable> {
    table.subsample(r)
}

/// Coefficient table of a one-dimensional symbol on `|k| <= kmax`.
pub fn coeffs_1d(spec: &SymbolSpec, kmax: i64, quad: &QuadParams) -> Result<CoeffTable> {
    fourier_coeffs(spec, &[kmax], quad)
}
