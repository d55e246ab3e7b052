//! Command-line front end. [`run`] parses arguments, dispatches, and returns
//! the process exit code: 0 on success, 1 when a reproduction row fails,
//! 2 on usage or input errors.

pub mod reproduce;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::entropy::{
    block_upper_bound, gm_lower_bound, perturbation_transfer, refined_bounds, renewal_entropy,
    EntropyInterval, EntropyMethod,
};
use crate::error::{Error, Result};
use crate::kernel::{cond_prob, joint_pmf, line, prob_cylinder, CylinderEvent, Site};
use crate::phase::{annulus_probe, domination_report, phase_verdict, regeneration_test, renewal_checks, strong_full_k, strong_k};
use crate::sampling::sample_batch;
use crate::spectral::{cached_fourier_coeffs, means, outer_coeffs, CoeffTable, QuadParams};
use crate::symbol::config::load_symbol;
use crate::symbol::{parse_symbol, Builtin, SymbolSpec};
use crate::ust::{compare_to_symbol, process_table, ust_samples, wilson_ust, EdgeProcess, FINITE_SIZE_ALLOWANCE};

use reproduce::{parse_table, run_table, ReproRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "detproc", version, about = "Stationary determinantal processes on Z^d")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Builtin name, expression in x1..xd, or a name from --config.
    #[arg(long, global = true, default_value = "sin2")]
    pub symbol: String,
    /// TOML file of symbol definitions.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Dimension; inferred from the symbol when omitted.
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Coefficient table radius.
    #[arg(long, global = true)]
    pub kmax: Option<i64>,
    #[arg(long = "quad-tol", global = true)]
    pub quad_tol: Option<f64>,
    /// Skip closed forms and integrate numerically.
    #[arg(long, global = true)]
    pub forced_quadrature: bool,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long = "cache-dir", global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Report entropies in bits.
    #[arg(long, global = true)]
    pub bits: bool,
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    /// Space-separated sites; `1,2` is one site in two dimensions.
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    pub window: Vec<String>,
    /// Shortcut for the sites 0..len on a line.
    #[arg(long)]
    pub len: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Block,
    Refined,
    Gm,
    Renewal,
    Perturb,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fourier coefficient table.
    Coeffs,
    /// Cylinder probability, or a conditional one-probability with --at.
    Prob {
        #[arg(long, num_args = 1.., allow_negative_numbers = true)]
        ones: Vec<String>,
        #[arg(long, num_args = 1.., allow_negative_numbers = true)]
        zeros: Vec<String>,
        #[arg(long, allow_negative_numbers = true)]
        at: Option<String>,
    },
    /// Every pattern probability on a window.
    Pmf {
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Exact samples on a window.
    Sample {
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Write `<stem>.csv` and `<stem>.json` instead of printing.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// AM, GM, HM of f and 1 - f.
    Means,
    /// Strong and full domination constants.
    Dominate,
    /// Entropy bounds.
    Entropy {
        #[arg(long, value_enum, default_value = "refined")]
        method: Method,
        #[arg(long, default_value_t = 8)]
        m: usize,
        /// Box shape for the block bound, e.g. `16` or `4x4`.
        #[arg(long)]
        shape: Option<String>,
        /// Reference symbol for the perturbation transfer.
        #[arg(long)]
        reference: Option<String>,
        /// Series tolerance for the renewal entropy.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Strong K / strong full K verdicts.
    Phase {
        #[arg(long, default_value_t = 16)]
        n: usize,
        /// Szegő infimum over the annulus INNER..=OUTER.
        #[arg(long, num_args = 2)]
        annulus: Option<Vec<i64>>,
    },
    /// Regeneration residual after a run of ones (plus renewal checks for renewal symbols).
    Regen {
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        h: usize,
    },
    /// Spanning-tree Monte Carlo against the edge-process symbol.
    Ust {
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, value_enum, default_value = "field")]
        process: ProcessArg,
        /// Lags such as `1` or `1,0`; defaults to unit lags.
        #[arg(long, num_args = 1.., allow_negative_numbers = true)]
        lag: Vec<String>,
        #[arg(long, default_value_t = FINITE_SIZE_ALLOWANCE)]
        allowance: f64,
        /// Also write the edge list of one tree.
        #[arg(long)]
        tree_csv: Option<PathBuf>,
    },
    /// Run the reproduction table.
    Reproduce {
        /// Only these row ids.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        only: Vec<String>,
        /// Alternative table file.
        #[arg(long)]
        table: Option<PathBuf>,
        /// List row ids and exit.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProcessArg {
    Field,
    XAxis,
    Diagonal,
    Zigzag,
}

impl From<ProcessArg> for EdgeProcess {
    fn from(p: ProcessArg) -> Self {
        match p {
            ProcessArg::Field => EdgeProcess::Field,
            ProcessArg::XAxis => EdgeProcess::XAxis,
            ProcessArg::Diagonal => EdgeProcess::Diagonal,
            ProcessArg::Zigzag => EdgeProcess::Zigzag,
        }
    }
}

pub fn parse_site(text: &str) -> Result<Site> {
    text.split(',')
        .map(|c| {
            c.trim().parse::<i64>().map_err(|_| Error::InvalidParameter {
                name: "site".into(),
                message: format!("`{text}` is not a comma-separated list of integers"),
            })
        })
        .collect()
}

fn parse_shape(text: &str) -> Result<Vec<usize>> {
    text.split('x')
        .map(|c| {
            c.trim().parse::<usize>().map_err(|_| Error::InvalidParameter {
                name: "shape".into(),
                message: format!("`{text}` is not of the form 4 or 4x4"),
            })
        })
        .collect()
}

/// Entry point for the binary.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    run_with(argv, &mut stdout.lock())
}

/// [`run`] with an explicit output sink. Diagnostics go to stderr.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            if code == 0 {
                let _ = write!(out, "{e}");
            } else {
                eprint!("{e}");
            }
            return if code == 0 { 0 } else { 2 };
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(crate::Error::Io(m)) if m.starts_with("Broken pipe") => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

struct Ctx<'a> {
    g: &'a Global,
    spec: SymbolSpec,
    quad: QuadParams,
}

impl Ctx<'_> {
    fn table(&self, kmax: i64) -> Result<CoeffTable> {
        let k = self.g.kmax.unwrap_or(0).max(kmax);
        cached_fourier_coeffs(&self.spec, &vec![k; self.spec.dim], &self.quad, self.g.cache_dir.as_deref())
    }

    fn table_for(&self, sites: &[Site]) -> Result<CoeffTable> {
        let spread = (0..self.spec.dim)
            .map(|a| {
                let lo = sites.iter().map(|s| s[a]).min().unwrap_or(0);
                let hi = sites.iter().map(|s| s[a]).max().unwrap_or(0);
                hi - lo
            })
            .max()
            .unwrap_or(0);
        self.table(spread.max(1))
    }

    fn sites(&self, texts: &[String]) -> Result<Vec<Site>> {
        let sites = texts.iter().map(|t| parse_site(t)).collect::<Result<Vec<_>>>()?;
        for s in &sites {
            if s.len() != self.spec.dim {
                return Err(Error::Precondition(format!(
                    "site {s:?} has {} coordinates, symbol has dimension {}",
                    s.len(),
                    self.spec.dim
                )));
            }
        }
        Ok(sites)
    }

    fn window(&self, w: &WindowArgs) -> Result<Vec<Site>> {
        match (w.len, w.window.is_empty()) {
            (Some(m), true) if self.spec.dim == 1 => Ok(line(0..m as i64)),
            (None, false) => self.sites(&w.window),
            _ => Err(Error::Precondition(
                "give either --window SITES or --len N (one-dimensional symbols)".into(),
            )),
        }
    }

    fn entropy(&self, iv: EntropyInterval) -> EntropyInterval {
        if self.g.bits {
            iv.in_bits()
        } else {
            iv
        }
    }
}

/// Smallest dimension in which the symbol text parses.
fn infer_dim(text: &str) -> usize {
    (1..=8).find(|&d| parse_symbol(text, d).is_ok()).unwrap_or(1)
}

fn resolve_symbol(g: &Global) -> Result<SymbolSpec> {
    if let Some(path) = &g.config {
        if let Ok(s) = load_symbol(path, &g.symbol) {
            if g.dim.is_some_and(|d| d != s.dim) {
                return Err(Error::Precondition(format!(
                    "`{}` is defined with dimension {}",
                    g.symbol, s.dim
                )));
            }
            return Ok(s);
        }
    }
    parse_symbol(&g.symbol, g.dim.unwrap_or_else(|| infer_dim(&g.symbol)))
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let g = &cli.global;
    let mut quad = QuadParams {
        tol: g.quad_tol,
        ..QuadParams::default()
    };
    if g.forced_quadrature {
        quad.closed_form = false;
    }
    if let Command::Reproduce { only, table, list } = &cli.command {
        return reproduce_cmd(g, only, table.as_ref(), *list, out);
    }
    let ctx = Ctx {
        g,
        spec: resolve_symbol(g)?,
        quad,
    };
    let spec = &ctx.spec;
    match &cli.command {
        Command::Coeffs => {
            let t = ctx.table(g.kmax.unwrap_or(8))?;
            coeffs_out(g.format, &spec.label(), &t, out)?;
        }
        Command::Prob { ones, zeros, at } => {
            let ev = CylinderEvent::new(ctx.sites(ones)?, ctx.sites(zeros)?)?;
            let mut all: Vec<Site> = ev.ones.iter().chain(&ev.zeros).cloned().collect();
            let at = at.as_ref().map(|a| parse_site(a)).transpose()?;
            all.extend(at.clone());
            let t = ctx.table_for(&all)?;
            let v = match &at {
                Some(site) => json!({
                    "symbol": spec.label(),
                    "at": site,
                    "ones": ev.ones,
                    "zeros": ev.zeros,
                    "conditional_probability": cond_prob(&t, site, &ev)?,
                }),
                None => json!({
                    "symbol": spec.label(),
                    "ones": ev.ones,
                    "zeros": ev.zeros,
                    "probability": prob_cylinder(&t, &ev)?,
                }),
            };
            emit(g.format, &v, out)?;
        }
        Command::Pmf { window } => {
            let w = ctx.window(window)?;
            let pmf = joint_pmf(&ctx.table_for(&w)?, &w)?;
            match g.format {
                Format::Csv => pmf.write_csv(&mut *out)?,
                _ => emit(g.format, &pmf.to_json(), out)?,
            }
        }
        Command::Sample { window, count, out: stem } => {
            let w = ctx.window(window)?;
            let batch = sample_batch(&ctx.table_for(&w)?, &w, *count, g.seed)?;
            if let Some(stem) = stem {
                batch.export(stem)?;
                emit(g.format, &batch.sidecar_json(), out)?;
            } else if g.format == Format::Csv {
                batch.write_csv(&mut *out)?;
            } else {
                let mut v = batch.sidecar_json();
                v["patterns"] = json!(batch
                    .samples
                    .iter()
                    .map(|s| s.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>())
                    .collect::<Vec<_>>());
                emit(g.format, &v, out)?;
            }
        }
        Command::Means => emit_ser(g.format, &means(spec, &ctx.quad)?, out)?,
        Command::Dominate => emit_ser(g.format, &domination_report(&means(spec, &ctx.quad)?), out)?,
        Command::Entropy {
            method,
            m,
            shape,
            reference,
            tol,
        } => {
            let iv = entropy_cmd(&ctx, *method, *m, shape.as_deref(), reference.as_deref(), *tol)?;
            emit_ser(g.format, &ctx.entropy(iv), out)?;
        }
        Command::Phase { n, annulus } => {
            let report = means(spec, &ctx.quad)?;
            let mut v = if spec.dim == 1 {
                let f = outer_coeffs(spec, *n, &ctx.quad)?;
                let c = outer_coeffs(&spec.complement(), *n, &ctx.quad)?;
                serde_json::to_value(phase_verdict(spec, &report, &f, &c, *n)?)
            } else {
                serde_json::to_value(json!({
                    "symbol": spec.label(),
                    "strong_k": strong_k(&report),
                    "strong_full_k": strong_full_k(spec),
                }))
            }
            .map_err(|e| Error::Io(e.to_string()))?;
            if let Some(a) = annulus {
                let (inner, outer) = (a[0], a[1]);
                let t = ctx.table(2 * outer)?;
                v["annulus"] = json!({
                    "inner": inner,
                    "outer": outer,
                    "szego_infimum": annulus_probe(&t, inner, outer)?,
                });
            }
            emit(g.format, &v, out)?;
        }
        Command::Regen { n, h } => {
            let t = ctx.table((n + 2 * h) as i64)?;
            let mut v = serde_json::to_value(regeneration_test(&t, *n, *h)?).map_err(|e| Error::Io(e.to_string()))?;
            v["symbol"] = json!(spec.label());
            if let Some(Builtin::Renewal(a)) = spec.as_builtin() {
                v["renewal_checks"] = serde_json::to_value(renewal_checks(*a)?).map_err(|e| Error::Io(e.to_string()))?;
            }
            emit(g.format, &v, out)?;
        }
        Command::Ust {
            n,
            samples,
            process,
            lag,
            allowance,
            tree_csv,
        } => {
            let kind: EdgeProcess = (*process).into();
            let lags: Vec<Vec<i64>> = if lag.is_empty() {
                (0..kind.dim())
                    .map(|a| (0..kind.dim()).map(|b| (a == b) as i64).collect())
                    .collect()
            } else {
                lag.iter().map(|l| parse_site(l)).collect::<Result<_>>()?
            };
            if let Some(path) = tree_csv {
                let file = std::fs::File::create(path)?;
                wilson_ust(*n, g.seed)?.write_csv(std::io::BufWriter::new(file))?;
            }
            let radius = lags.iter().flatten().map(|l| l.abs()).max().unwrap_or(1).max(1);
            let s = ust_samples(*n, *samples, g.seed, kind)?;
            let table = process_table(kind, radius, &ctx.quad)?;
            let report = compare_to_symbol(&s, &table, &lags, *allowance)?;
            let mut v = serde_json::to_value(&report).map_err(|e| Error::Io(e.to_string()))?;
            v["pass"] = json!(report.pass());
            emit(g.format, &v, out)?;
        }
        Command::Reproduce { .. } => unreachable!("handled above"),
    }
    Ok(0)
}

fn entropy_cmd(
    ctx: &Ctx,
    method: Method,
    m: usize,
    shape: Option<&str>,
    reference: Option<&str>,
    tol: f64,
) -> Result<EntropyInterval> {
    let spec = &ctx.spec;
    let start = std::time::Instant::now();
    let interval = |method, m, lo, hi| EntropyInterval {
        symbol: spec.label(),
        method,
        m,
        lo,
        hi,
        pruned_mass: 0.0,
        uninformative: false,
        runtime_ms: start.elapsed().as_millis() as u64,
    };
    match method {
        Method::Refined => refined_bounds(spec, m, &ctx.quad),
        Method::Gm => {
            let lo = gm_lower_bound(&means(spec, &ctx.quad)?);
            Ok(interval(EntropyMethod::GmLower, 0, lo, std::f64::consts::LN_2))
        }
        Method::Block => {
            let shape = match shape {
                Some(s) => parse_shape(s)?,
                None => vec![m; spec.dim],
            };
            if shape.len() != spec.dim {
                return Err(Error::Precondition("box shape must match the dimension".into()));
            }
            let kmax: Vec<i64> = shape.iter().map(|&s| s as i64).collect();
            let t = cached_fourier_coeffs(spec, &kmax, &ctx.quad, ctx.g.cache_dir.as_deref())?;
            let hi = block_upper_bound(&t, &shape)?;
            let cells = shape.iter().product();
            Ok(interval(EntropyMethod::Block, cells, 0.0, hi))
        }
        Method::Renewal => match spec.as_builtin() {
            Some(Builtin::Renewal(a)) => {
                let v = renewal_entropy(*a, tol)?;
                Ok(interval(EntropyMethod::RenewalExact, 0, v, v + tol))
            }
            _ => Err(Error::Precondition("--method renewal needs a renewal(a) symbol".into())),
        },
        Method::Perturb => {
            let text = reference
                .ok_or_else(|| Error::Precondition("--method perturb needs --reference".into()))?;
            let g = parse_symbol(text, spec.dim)?;
            let iv = refined_bounds(&g, m, &ctx.quad)?;
            perturbation_transfer(&iv, spec, &g, &ctx.quad)
        }
    }
}

fn reproduce_cmd(
    g: &Global,
    only: &[String],
    table: Option<&PathBuf>,
    list: bool,
    out: &mut dyn Write,
) -> Result<i32> {
    let text = match table {
        Some(p) => std::fs::read_to_string(p)?,
        None => reproduce::TABLE.to_string(),
    };
    let rows = parse_table(&text)?;
    if list {
        for r in &rows {
            writeln!(out, "{:<28} {}", r.id, r.description)?;
        }
        return Ok(0);
    }
    let results = run_table(&rows, only)?;
    match g.format {
        Format::Json => emit_ser(Format::Json, &results, out)?,
        Format::Csv => {
            let mut wr = csv::Writer::from_writer(&mut *out);
            for r in &results {
                wr.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
            }
            wr.flush()?;
        }
        Format::Text => {
            for r in &results {
                writeln!(out, "{}", repro_line(r))?;
            }
        }
    }
    Ok(if results.iter().all(|r| r.pass) { 0 } else { 1 })
}

fn num(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-4 {
        format!("{v:.3e}")
    } else {
        format!("{v:.10}")
    }
}

pub fn repro_line(r: &ReproRow) -> String {
    format!(
        "{} {:<28} computed {:<16} ref {:<16} tol {:.1e} ({:?}) {} ms",
        if r.pass { "PASS" } else { "FAIL" },
        r.id,
        num(r.computed),
        num(r.paper),
        r.tolerance,
        r.comparison,
        r.runtime_ms
    )
}

fn coeffs_out(format: Format, label: &str, t: &CoeffTable, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Csv => {
            let mut header: Vec<String> = (1..=t.dim).map(|a| format!("k{a}")).collect();
            header.extend(["re".to_string(), "im".to_string()]);
            writeln!(out, "{}", header.join(","))?;
            for (k, c) in t.iter() {
                let ks: Vec<String> = k.iter().map(|v| v.to_string()).collect();
                writeln!(out, "{},{:e},{:e}", ks.join(","), c.re, c.im)?;
            }
        }
        _ => {
            let v = json!({
                "symbol": label,
                "dim": t.dim,
                "kmax": t.kmax,
                "provenance": t.provenance,
                "coefficients": t.iter().map(|(k, c)| json!({"k": k, "re": c.re, "im": c.im})).collect::<Vec<_>>(),
            });
            emit(format, &v, out)?;
        }
    }
    Ok(())
}

fn emit_ser<T: Serialize>(format: Format, value: &T, out: &mut dyn Write) -> Result<()> {
    let v = serde_json::to_value(value).map_err(|e| Error::Io(e.to_string()))?;
    emit(format, &v, out)
}

/// JSON as is; CSV and text as flattened `key,value` / `key: value` lines.
fn emit(format: Format, v: &Value, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Json => {
            let text = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(out, "{text}")?;
        }
        Format::Csv | Format::Text => {
            let mut flat = Vec::new();
            flatten("", v, &mut flat);
            if format == Format::Csv {
                let mut wr = csv::Writer::from_writer(&mut *out);
                wr.write_record(["key", "value"]).map_err(|e| Error::Io(e.to_string()))?;
                for (k, val) in &flat {
                    wr.write_record([k, val]).map_err(|e| Error::Io(e.to_string()))?;
                }
                wr.flush()?;
            } else {
                for (k, val) in &flat {
                    writeln!(out, "{k}: {val}")?;
                }
            }
        }
    }
    Ok(())
}

fn flatten(prefix: &str, v: &Value, acc: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(&key(k), x, acc)),
        Value::Array(a) if a.iter().any(|x| x.is_object() || x.is_array()) => {
            a.iter().enumerate().for_each(|(i, x)| flatten(&key(&i.to_string()), x, acc))
        }
        Value::String(s) => acc.push((prefix.to_string(), s.clone())),
        other => acc.push((prefix.to_string(), other.to_string())),
    }
}
