//! The reproduction table. Quantities, reference values and tolerances live in
//! `data/reproduce.toml`; this module only knows how to compute each quantity.

use std::collections::HashMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::entropy::{block_upper_bound, perturbation_transfer, refined_bounds};
use crate::error::{Error, Result};
use crate::kernel::{joint_pmf, line, Pmf};
use crate::phase::{regeneration_test, renewal_checks};
use crate::sampling::sample_batch;
use crate::spectral::{fourier_coeffs, means, szego_ratio_gm, QuadParams};
use crate::symbol::{parse_symbol, SymbolSpec};
use crate::ust::{compare_to_symbol, process_table, ust_samples_multi, EdgeProcess, ProcessSamples};

/// The built-in table.
pub const TABLE: &str = include_str!("../../data/reproduce.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    Gm,
    OneMinusGmComplement,
    OneMinusHmComplement,
    HmComplement,
    SzegoRatio,
    RefinedLo,
    RefinedHi,
    /// `lo(symbol, m) - hi(reference, reference_m)`.
    RefinedSeparation,
    Block,
    PerturbLo,
    RenewalChecks,
    Regeneration,
    UstMean,
    UstCov,
    SamplerTv,
    /// Pearson statistic on the window patterns, standardized as `(χ² - df)/sqrt(2 df)`.
    SamplerChi2,
    /// 0 when two runs with the same seed give identical CSV bytes, else 1.
    SamplerRepro,
    PairCovariance,
    ComplementSymmetry,
    ThinningIdentity,
    EvenIndependence,
    MinPatternProb,
    SubsampleIdentity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// `|computed - reference| <= tolerance`.
    #[default]
    Abs,
    /// `computed <= reference + tolerance`.
    AtMost,
    /// `computed >= reference - tolerance`.
    AtLeast,
    /// `computed > reference`.
    GreaterThan,
}

impl Comparison {
    pub fn check(self, computed: f64, reference: f64, tolerance: f64) -> bool {
        match self {
            Comparison::Abs => (computed - reference).abs() <= tolerance,
            Comparison::AtMost => computed <= reference + tolerance,
            Comparison::AtLeast => computed >= reference - tolerance,
            Comparison::GreaterThan => computed > reference,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowSpec {
    pub id: String,
    pub description: String,
    pub quantity: Quantity,
    pub paper: f64,
    pub tolerance: f64,
    #[serde(default)]
    pub comparison: Comparison,
    /// Where the reference value comes from, for the reader.
    #[serde(default)]
    pub anchor: String,
    pub symbol: Option<String>,
    pub dim: Option<usize>,
    pub reference: Option<String>,
    pub reference_m: Option<usize>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub h: Option<usize>,
    pub a: Option<f64>,
    pub p: Option<f64>,
    pub r: Option<u32>,
    pub shape: Option<Vec<usize>>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub lag: Option<Vec<i64>>,
    pub process: Option<EdgeProcess>,
    /// Turn off closed forms.
    #[serde(default)]
    pub forced: bool,
    /// Statistical rows widen the tolerance by this many standard errors.
    #[serde(default)]
    pub sigmas: f64,
}

#[derive(Debug, Deserialize)]
struct TableFile {
    row: Vec<RowSpec>,
}

pub fn parse_table(text: &str) -> Result<Vec<RowSpec>> {
    let t: TableFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    Ok(t.row)
}

/// One line of the reproduction report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproRow {
    pub id: String,
    pub description: String,
    pub computed: f64,
    pub paper: f64,
    /// Effective tolerance, including any statistical widening.
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
    pub runtime_ms: u64,
}

fn need<T: Clone>(v: &Option<T>, name: &str, id: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::Config(format!("row {id}: missing `{name}`")))
}

/// Shared state across rows: spanning-tree samples are drawn once per
/// `(n, samples, seed)` and reused.
#[derive(Default)]
pub struct Runner {
    ust: HashMap<(usize, usize, u64), Vec<ProcessSamples>>,
}

const KINDS: [EdgeProcess; 4] = [
    EdgeProcess::Field,
    EdgeProcess::XAxis,
    EdgeProcess::Diagonal,
    EdgeProcess::Zigzag,
];

impl Runner {
    pub fn new() -> Runner {
        Runner::default()
    }

    pub fn run(&mut self, row: &RowSpec) -> Result<ReproRow> {
        let start = Instant::now();
        let (computed, se) = self.compute(row)?;
        let tolerance = row.tolerance + row.sigmas * se;
        Ok(ReproRow {
            id: row.id.clone(),
            description: row.description.clone(),
            computed,
            paper: row.paper,
            tolerance,
            comparison: row.comparison,
            pass: row.comparison.check(computed, row.paper, tolerance),
            runtime_ms: start.elapsed().as_millis() as u64,
        })
    }

    fn symbol(&self, row: &RowSpec) -> Result<SymbolSpec> {
        parse_symbol(&need(&row.symbol, "symbol", &row.id)?, row.dim.unwrap_or(1))
    }

    fn compute(&mut self, row: &RowSpec) -> Result<(f64, f64)> {
        let id = &row.id;
        let quad = if row.forced { QuadParams::forced() } else { QuadParams::default() };
        let exact = |v: f64| Ok((v, 0.0));
        let mean_of = |m: &crate::spectral::MeanValue| if m.divergent { 0.0 } else { m.value };
        match row.quantity {
            Quantity::Gm => exact(mean_of(&means(&self.symbol(row)?, &quad)?.gm)),
            Quantity::OneMinusGmComplement => {
                exact(1.0 - mean_of(&means(&self.symbol(row)?, &quad)?.gm_complement))
            }
            Quantity::OneMinusHmComplement => {
                exact(1.0 - mean_of(&means(&self.symbol(row)?, &quad)?.hm_complement))
            }
            Quantity::HmComplement => exact(mean_of(&means(&self.symbol(row)?, &quad)?.hm_complement)),
            Quantity::SzegoRatio => {
                let n = need(&row.n, "n", id)?;
                let t = fourier_coeffs(&self.symbol(row)?, &[n as i64], &quad)?;
                let r = szego_ratio_gm(&t, n)?;
                let v = r
                    .ratios
                    .get(n)
                    .copied()
                    .ok_or_else(|| Error::Consistency(format!("Toeplitz sequence stopped before {n}")))?;
                exact(v)
            }
            Quantity::RefinedLo => exact(refined_bounds(&self.symbol(row)?, need(&row.m, "m", id)?, &quad)?.lo),
            Quantity::RefinedHi => exact(refined_bounds(&self.symbol(row)?, need(&row.m, "m", id)?, &quad)?.hi),
            Quantity::RefinedSeparation => {
                let lo = refined_bounds(&self.symbol(row)?, need(&row.m, "m", id)?, &quad)?.lo;
                let g = parse_symbol(&need(&row.reference, "reference", id)?, 1)?;
                let hi = refined_bounds(&g, need(&row.reference_m, "reference_m", id)?, &quad)?.hi;
                exact(lo - hi)
            }
            Quantity::Block => {
                let shape = need(&row.shape, "shape", id)?;
                let kmax: Vec<i64> = shape.iter().map(|&s| s as i64).collect();
                let t = fourier_coeffs(&self.symbol(row)?, &kmax, &quad)?;
                exact(block_upper_bound(&t, &shape)?)
            }
            Quantity::PerturbLo => {
                let f = self.symbol(row)?;
                let g = parse_symbol(&need(&row.reference, "reference", id)?, 1)?;
                let iv = refined_bounds(&g, need(&row.m, "m", id)?, &quad)?;
                exact(perturbation_transfer(&iv, &f, &g, &quad)?.lo)
            }
            Quantity::RenewalChecks => {
                let rep = renewal_checks(need(&row.a, "a", id)?)?;
                exact(rep.checks.iter().map(|c| c.max_error).fold(0.0, f64::max))
            }
            Quantity::Regeneration => {
                let (n, h) = (need(&row.n, "n", id)?, need(&row.h, "h", id)?);
                let t = fourier_coeffs(&self.symbol(row)?, &[(n + 2 * h) as i64], &quad)?;
                exact(regeneration_test(&t, n, h)?.max_residual)
            }
            Quantity::UstMean | Quantity::UstCov => {
                let n = need(&row.n, "n", id)?;
                let count = need(&row.samples, "samples", id)?;
                let seed = row.seed.unwrap_or(0);
                let kind = need(&row.process, "process", id)?;
                let sets = match self.ust.entry((n, count, seed)) {
                    std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(ust_samples_multi(n, count, seed, &KINDS)?)
                    }
                };
                let samples = sets.iter().find(|s| s.kind == kind).expect("all kinds drawn");
                let lag = row.lag.clone().unwrap_or_else(|| vec![1; kind.dim()]);
                let radius = lag.iter().map(|l| l.abs()).max().unwrap_or(0).max(1);
                let table = process_table(kind, radius, &quad)?;
                let rep = compare_to_symbol(samples, &table, &[lag], 0.0)?;
                let r = if row.quantity == Quantity::UstMean { &rep.mean } else { &rep.lags[0] };
                Ok((r.empirical, r.se))
            }
            Quantity::SamplerTv => {
                let m = need(&row.m, "m", id)?;
                let t = fourier_coeffs(&self.symbol(row)?, &[m as i64], &quad)?;
                let w = line(0..m as i64);
                let batch = sample_batch(&t, &w, need(&row.samples, "samples", id)?, row.seed.unwrap_or(0))?;
                exact(batch.empirical_pmf()?.total_variation(&joint_pmf(&t, &w)?))
            }
            Quantity::SamplerChi2 => {
                let m = need(&row.m, "m", id)?;
                let t = fourier_coeffs(&self.symbol(row)?, &[m as i64], &quad)?;
                let w = line(0..m as i64);
                let count = need(&row.samples, "samples", id)?;
                let batch = sample_batch(&t, &w, count, row.seed.unwrap_or(0))?;
                exact(chi2_z(&batch.empirical_pmf()?, &joint_pmf(&t, &w)?, count))
            }
            Quantity::SamplerRepro => {
                let m = need(&row.m, "m", id)?;
                let t = fourier_coeffs(&self.symbol(row)?, &[m as i64], &quad)?;
                let w = line(0..m as i64);
                let count = need(&row.samples, "samples", id)?;
                let seed = row.seed.unwrap_or(0);
                let mut bytes = Vec::new();
                for _ in 0..2 {
                    let mut buf = Vec::new();
                    sample_batch(&t, &w, count, seed)?.write_csv(&mut buf)?;
                    bytes.push(buf);
                }
                exact(if bytes[0] == bytes[1] { 0.0 } else { 1.0 })
            }
            Quantity::PairCovariance => {
                let m = need(&row.m, "m", id)?;
                let t = fourier_coeffs(&self.symbol(row)?, &[m as i64], &quad)?;
                let pmf = joint_pmf(&t, &line(0..m as i64))?;
                let f0 = t.mean();
                let mut worst: f64 = 0.0;
                for i in 0..m {
                    for j in i + 1..m {
                        let both = pmf.marginal(&[i, j]).prob(&[true, true]);
                        let pred = -t.get1((j - i) as i64)?.norm_sqr();
                        worst = worst.max((both - f0 * f0 - pred).abs());
                    }
                }
                exact(worst)
            }
            Quantity::ComplementSymmetry => {
                let m = need(&row.m, "m", id)?;
                let spec = self.symbol(row)?;
                let w = line(0..m as i64);
                let pf = joint_pmf(&fourier_coeffs(&spec, &[m as i64], &quad)?, &w)?;
                let pc = joint_pmf(&fourier_coeffs(&spec.complement(), &[m as i64], &quad)?, &w)?;
                exact(max_diff(&pf.flipped(), &pc))
            }
            Quantity::ThinningIdentity => {
                let m = need(&row.m, "m", id)?;
                let p = need(&row.p, "p", id)?;
                let text = need(&row.symbol, "symbol", id)?;
                let w = line(0..m as i64);
                let pf = joint_pmf(&fourier_coeffs(&self.symbol(row)?, &[m as i64], &quad)?, &w)?;
                let scaled = parse_symbol(&format!("{p}*({text})"), 1)?;
                let pp = joint_pmf(&fourier_coeffs(&scaled, &[m as i64], &quad)?, &w)?;
                exact(max_diff(&pf.thinned(p), &pp))
            }
            Quantity::EvenIndependence => {
                let m = need(&row.m, "m", id)?;
                let t = fourier_coeffs(&self.symbol(row)?, &[2 * m as i64], &quad)?;
                let pmf = joint_pmf(&t, &line((0..m as i64).map(|i| 2 * i)))?;
                let f0 = t.mean();
                let worst = pmf
                    .probs
                    .iter()
                    .enumerate()
                    .map(|(idx, p)| {
                        let ones = idx.count_ones() as i32;
                        (p - f0.powi(ones) * (1.0 - f0).powi(m as i32 - ones)).abs()
                    })
                    .fold(0.0, f64::max);
                exact(worst)
            }
            Quantity::MinPatternProb => {
                let m = need(&row.m, "m", id)?;
                let t = fourier_coeffs(&self.symbol(row)?, &[m as i64], &quad)?;
                let pmf = joint_pmf(&t, &line(0..m as i64))?;
                exact(pmf.probs.iter().copied().fold(f64::INFINITY, f64::min))
            }
            Quantity::SubsampleIdentity => {
                let r = need(&row.r, "r", id)?;
                let kmax = row.n.unwrap_or(6) as i64;
                let spec = self.symbol(row)?;
                let big = fourier_coeffs(&spec, &[kmax * r as i64], &quad)?;
                let sub = big.subsample(&[r])?;
                let folded = fourier_coeffs(&spec.fold(r)?, &[kmax], &quad)?;
                let worst = (-kmax..=kmax)
                    .map(|k| Ok((sub.get1(k)? - folded.get1(k)?).norm()))
                    .collect::<Result<Vec<f64>>>()?
                    .into_iter()
                    .fold(0.0, f64::max);
                exact(worst)
            }
        }
    }
}

/// Standardized Pearson statistic over patterns with positive probability.
pub fn chi2_z(empirical: &Pmf, exact: &Pmf, count: usize) -> f64 {
    let n = count as f64;
    let mut chi2 = 0.0;
    let mut cells = 0usize;
    for (e, p) in empirical.probs.iter().zip(&exact.probs) {
        if *p > 0.0 {
            chi2 += (e * n - p * n).powi(2) / (p * n);
            cells += 1;
        }
    }
    let df = cells.saturating_sub(1).max(1) as f64;
    (chi2 - df) / (2.0 * df).sqrt()
}

fn max_diff(a: &Pmf, b: &Pmf) -> f64 {
    a.probs.iter().zip(&b.probs).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Runs the rows whose id is in `only` (all rows when `only` is empty).
pub fn run_table(rows: &[RowSpec], only: &[String]) -> Result<Vec<ReproRow>> {
    let mut runner = Runner::new();
    rows.iter()
        .filter(|r| only.is_empty() || only.contains(&r.id))
        .map(|r| runner.run(r))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_table_parses_with_unique_ids() {
        let rows = parse_table(TABLE).unwrap();
        let mut ids: Vec<_> = rows.iter().map(|r| r.id.clone()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), rows.len());
        assert!(rows.len() >= 30);
    }

    #[test]
    fn comparisons() {
        assert!(Comparison::Abs.check(1.0, 1.05, 0.1));
        assert!(!Comparison::AtMost.check(1.2, 1.0, 0.1));
        assert!(Comparison::AtLeast.check(0.95, 1.0, 0.1));
        assert!(!Comparison::GreaterThan.check(1.0, 1.0, 0.5));
    }

    #[test]
    fn quick_rows_pass() {
        let rows = parse_table(TABLE).unwrap();
        let quick = ["gm-sin2", "gm-axis", "refined-sin2-m2-lo", "renewal-0.5", "pair-cov-sin2"];
        let only: Vec<String> = quick.iter().map(|s| s.to_string()).collect();
        let out = run_table(&rows, &only).unwrap();
        assert_eq!(out.len(), quick.len());
        for r in out {
            assert!(r.pass, "{r:?}");
        }
    }
}
