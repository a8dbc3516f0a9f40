//! The `mfps` command line.
//!
//! Exit status: 0 success, 1 a verified identity failed, 2 usage/parse/
//! precondition errors, 3 composability diverged, 4 composability undecided,
//! 5 inversion errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::calculus::{higher_derivative, jacobian, jacobian_at_origin, partial_derivative};
use crate::composition::blocks::assemble_by_blocks;
use crate::composition::{
    chain_rule_rhs, check_composability, compose, compose_unit, CoefficientOracle, ConvergenceStatus,
    SeriesVector, SummationBudget,
};
use crate::error::Error;
use crate::expr::{build_oracle, eval_expression, parse_expression, parse_oracle_spec};
use crate::format::{format_rational, format_series, read_series, write_series, write_series_list, write_series_matrix};
use crate::inversion::{invert, invert_affine};
use crate::linalg::det;
use crate::multiindex::{enumerate_degree, enumerate_up_to, multiindex_count, MultiIndex};
use crate::series::TruncatedSeries;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IDENTITY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;
pub const EXIT_UNDECIDED: i32 = 4;
pub const EXIT_INVERSION: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "mfps", about = "Truncated multivariate formal power series", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct RingArgs {
    /// Number of variables.
    #[arg(long = "n")]
    pub n: usize,
    /// Truncation order (inclusive total degree).
    #[arg(long)]
    pub order: i32,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    /// Largest total degree summed in condition series.
    #[arg(long = "max-degree", default_value_t = 200)]
    pub max_degree: u32,
    /// Relative tolerance over the stabilization window.
    #[arg(long = "tol", default_value_t = 1e-9)]
    pub tol: f64,
    /// Divergence bound on partial sums.
    #[arg(long, default_value_t = 1e12)]
    pub bound: f64,
    /// Stabilization window length.
    #[arg(long, default_value_t = 8)]
    pub window: usize,
}

impl BudgetArgs {
    fn budget(&self) -> SummationBudget {
        SummationBudget {
            max_degree: self.max_degree,
            tolerance: self.tol,
            bound: self.bound,
            window: self.window,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact composition f∘G (nonunit G, or polynomial f).
    Compose {
        #[command(flatten)]
        ring: RingArgs,
        /// Outer series f (expression, or @file for a series document).
        #[arg(long, allow_hyphen_values = true)]
        outer: String,
        /// Inner components g1..gn, in order.
        #[arg(long, allow_hyphen_values = true)]
        inner: Vec<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Numerical composition of an oracle series with a unit inner vector.
    ComposeUnit {
        #[command(flatten)]
        ring: RingArgs,
        /// geom2:c, geom1:r,axis, expprod, poly:FILE (or name(args)).
        #[arg(long)]
        oracle: String,
        #[arg(long, allow_hyphen_values = true)]
        inner: Vec<String>,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Also rebuild the result block by block (n = 2) and report the gap.
        #[arg(long)]
        by_blocks: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the composability condition series at one β.
    CheckComp {
        #[arg(long)]
        oracle: String,
        /// Constant terms of the inner series, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        btheta: String,
        /// Multi-index β, comma separated.
        #[arg(long)]
        beta: String,
        /// Number of variables; defaults to the length of --btheta.
        #[arg(long = "n")]
        n: Option<usize>,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Partial derivative D_var^times f.
    Derive {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        /// Variable index (1-based).
        #[arg(long)]
        var: usize,
        #[arg(long, default_value_t = 1)]
        times: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Formal Jacobian of G, or its value and determinant at the origin.
    Jacobian {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long, allow_hyphen_values = true)]
        g: Vec<String>,
        #[arg(long)]
        at_origin: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check D_j(f∘G) = Σ_i (D_i f∘G)·D_j g_i for every j.
    ChainruleVerify {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long, allow_hyphen_values = true)]
        outer: String,
        #[arg(long, allow_hyphen_values = true)]
        inner: Vec<String>,
    },
    /// Compositional inverse (nonunit G, or affine unit G).
    Invert {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long, allow_hyphen_values = true)]
        g: Vec<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Inverse of an affine vector c + L·X.
    InvertAffine {
        #[arg(long = "n")]
        n: usize,
        #[arg(long, default_value_t = 1)]
        order: i32,
        #[arg(long, allow_hyphen_values = true)]
        g: Vec<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Homogeneous blocks f[k].
    Blocks {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        /// Only this degree; all degrees 0..=order otherwise.
        #[arg(long)]
        k: Option<u32>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// f^m assembled coefficientwise from block products, checked against f^m.
    PowBlocks {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long)]
        m: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Number of multi-indices of total degree k in n variables.
    CountIndices {
        #[arg(long = "n")]
        n: usize,
        #[arg(long)]
        k: u32,
        /// Also list them in lexicographic order.
        #[arg(long)]
        list: bool,
    },
}

/// Failure of a command, already mapped to an exit status.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Diverged { .. } => EXIT_DIVERGED,
            Error::Undecided { .. } => EXIT_UNDECIDED,
            Error::Inversion(_) => EXIT_INVERSION,
            _ => EXIT_USAGE,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

/// Validated session parameters shared by most subcommands.
#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub n: usize,
    pub order: i32,
    pub budget: SummationBudget,
    pub out: Option<PathBuf>,
}

impl SessionConfig {
    pub fn new(n: usize, order: i32, budget: SummationBudget, out: Option<PathBuf>) -> Result<Self, CliError> {
        if n < 1 {
            return Err(CliError::usage("--n must be ≥ 1"));
        }
        if order < 0 {
            return Err(CliError::usage("--order must be ≥ 0"));
        }
        budget.validate()?;
        Ok(SessionConfig { n, order, budget, out })
    }

    /// Parses an expression (or `@file` series document) at this session's shape.
    pub fn series(&self, text: &str) -> Result<TruncatedSeries, CliError> {
        if let Some(path) = text.strip_prefix('@') {
            let s = load_series(path)?;
            if s.n() != self.n {
                return Err(CliError::usage(format!("{path}: n = {}, expected {}", s.n(), self.n)));
            }
            return Ok(s.with_order(self.order));
        }
        let e = parse_expression(text, self.n).map_err(|e| CliError::usage(format!("{text:?}: {e}")))?;
        eval_expression(&e, self.n, self.order).map_err(|e| CliError::usage(format!("{text:?}: {e}")))
    }

    pub fn vector(&self, texts: &[String]) -> Result<SeriesVector, CliError> {
        if texts.len() != self.n {
            return Err(CliError::usage(format!(
                "expected {} inner components, got {}",
                self.n,
                texts.len()
            )));
        }
        let comps = texts.iter().map(|t| self.series(t)).collect::<Result<Vec<_>, _>>()?;
        Ok(SeriesVector::new(comps)?)
    }
}

fn load_series(path: &str) -> Result<TruncatedSeries, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{path}: {e}")))?;
    read_series(&text).map_err(|e| CliError::usage(format!("{path}: {e}")))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::usage(format!("{}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::usage(format!("stdout: {e}"))),
    }
}

fn render_series(s: &TruncatedSeries, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => write_series(s),
        OutputFormat::Text => format!("{}\n", format_series(s)),
    }
}

fn render_list(list: &[TruncatedSeries], format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => write_series_list(list),
        OutputFormat::Text => list.iter().map(|s| format!("{}\n", format_series(s))).collect(),
    }
}

fn parse_csv<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|_| CliError::usage(format!("bad {what} entry {p:?}")))
        })
        .collect()
}

fn oracle(text: &str, n: usize) -> Result<CoefficientOracle, CliError> {
    let spec = parse_oracle_spec(text, n).map_err(|e| CliError::usage(format!("--oracle {text:?}: {e}")))?;
    build_oracle(&spec, n, |path| load_series(path).map_err(|e| e.message)).map_err(CliError::usage)
}

#[derive(Serialize)]
struct UnitTerm {
    exp: MultiIndex,
    value: f64,
}

#[derive(Serialize)]
struct UnitOutput<'a> {
    n: usize,
    order: i32,
    exact: bool,
    terms: Vec<UnitTerm>,
    #[serde(skip_serializing_if = "Option::is_none")]
    block_route_max_gap: Option<f64>,
    reports: &'a [crate::composition::ConvergenceReport],
}

#[derive(Serialize)]
struct OriginOutput {
    at_origin: Vec<Vec<String>>,
    det: String,
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Compose { ring, outer, inner, output } => {
            let cfg = SessionConfig::new(ring.n, ring.order, SummationBudget::default(), output.out)?;
            let f = cfg.series(&outer)?;
            let g = cfg.vector(&inner)?;
            if g.is_zero() {
                let _ = writeln!(err, "warning: inner vector is θ = (0,…,0); f∘θ is defined as the constant 1");
            }
            let h = compose(&f, &g)?;
            emit(out, cfg.out.as_deref(), &render_series(&h, output.format))?;
        }
        Command::ComposeUnit {
            ring,
            oracle: spec,
            inner,
            budget,
            by_blocks,
            out: path,
        } => {
            let cfg = SessionConfig::new(ring.n, ring.order, budget.budget(), path)?;
            let f = oracle(&spec, cfg.n)?;
            let g = cfg.vector(&inner)?;
            if g.is_zero() {
                let _ = writeln!(err, "warning: inner vector is θ = (0,…,0); f∘θ is defined as the constant 1");
            }
            let result = compose_unit(&f, &g, cfg.order as u32, &cfg.budget)?;
            let gap = if by_blocks {
                if cfg.n != 2 {
                    return Err(CliError::usage("--by-blocks needs n = 2"));
                }
                let blocks = assemble_by_blocks(&f, g.component(0), g.component(1), cfg.order as u32, &cfg.budget)?;
                let keys: std::collections::BTreeSet<&MultiIndex> =
                    blocks.keys().chain(result.coefficients.keys()).collect();
                Some(keys.into_iter().fold(0.0_f64, |m, k| {
                    let a = blocks.get(k).copied().unwrap_or(0.0);
                    m.max((a - result.coefficient(k)).abs())
                }))
            } else {
                None
            };
            let doc = UnitOutput {
                n: result.n,
                order: result.order,
                exact: result.exact.is_some(),
                terms: result
                    .coefficients
                    .iter()
                    .map(|(k, v)| UnitTerm { exp: k.clone(), value: *v })
                    .collect(),
                block_route_max_gap: gap,
                reports: &result.reports,
            };
            let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
            text.push('\n');
            emit(out, cfg.out.as_deref(), &text)?;
        }
        Command::CheckComp {
            oracle: spec,
            btheta,
            beta,
            n,
            budget,
            out: path,
        } => {
            let b: Vec<f64> = parse_csv(&btheta, "--btheta")?;
            let n = n.unwrap_or(b.len());
            let cfg = SessionConfig::new(n, 0, budget.budget(), path)?;
            let beta = MultiIndex::new(parse_csv(&beta, "--beta")?);
            let f = oracle(&spec, n)?;
            let report = check_composability(&f, &b, &beta, &cfg.budget)?;
            let mut text = serde_json::to_string_pretty(&report).expect("serializable");
            text.push('\n');
            emit(out, cfg.out.as_deref(), &text)?;
            return Ok(match report.status {
                ConvergenceStatus::Converged => EXIT_OK,
                ConvergenceStatus::Diverged => EXIT_DIVERGED,
                ConvergenceStatus::Inconclusive => EXIT_UNDECIDED,
            });
        }
        Command::Derive {
            ring,
            f,
            var,
            times,
            output,
        } => {
            let cfg = SessionConfig::new(ring.n, ring.order, SummationBudget::default(), output.out)?;
            let f = cfg.series(&f)?;
            if var == 0 || var > cfg.n {
                return Err(CliError::usage(format!("--var must be in 1..={}", cfg.n)));
            }
            let d = higher_derivative(&f, var - 1, times)?;
            emit(out, cfg.out.as_deref(), &render_series(&d, output.format))?;
        }
        Command::Jacobian {
            ring,
            g,
            at_origin,
            out: path,
        } => {
            let cfg = SessionConfig::new(ring.n, ring.order, SummationBudget::default(), path)?;
            let g = cfg.vector(&g)?;
            let text = if at_origin {
                let m = jacobian_at_origin(&g);
                let doc = OriginOutput {
                    at_origin: m.iter().map(|r| r.iter().map(format_rational).collect()).collect(),
                    det: format_rational(&det(&m)),
                };
                let mut t = serde_json::to_string_pretty(&doc).expect("serializable");
                t.push('\n');
                t
            } else {
                write_series_matrix(jacobian(&g)?.rows())
            };
            emit(out, cfg.out.as_deref(), &text)?;
        }
        Command::ChainruleVerify { ring, outer, inner } => {
            let cfg = SessionConfig::new(ring.n, ring.order, SummationBudget::default(), None)?;
            let f = cfg.series(&outer)?;
            let g = cfg.vector(&inner)?;
            let lhs_base = compose(&f, &g)?;
            let mut all = true;
            for j in 0..cfg.n {
                let rhs = chain_rule_rhs(&f, &g, j)?;
                let lhs = partial_derivative(&lhs_base, j)?.retruncate(rhs.order())?;
                let ok = lhs == rhs;
                all &= ok;
                let _ = writeln!(
                    out,
                    "j={} {} lhs = {} ; rhs = {}",
                    j + 1,
                    if ok { "equal" } else { "DIFFER" },
                    format_series(&lhs),
                    format_series(&rhs)
                );
            }
            return Ok(if all { EXIT_OK } else { EXIT_IDENTITY_FAILED });
        }
        Command::Invert { ring, g, output } => {
            let cfg = SessionConfig::new(ring.n, ring.order, SummationBudget::default(), output.out)?;
            let g = cfg.vector(&g)?;
            let h = invert(&g, cfg.order)?;
            emit(out, cfg.out.as_deref(), &render_list(h.components(), output.format))?;
        }
        Command::InvertAffine { n, order, g, output } => {
            let cfg = SessionConfig::new(n, order, SummationBudget::default(), output.out)?;
            let g = cfg.vector(&g)?;
            let h = invert_affine(&g)?;
            emit(out, cfg.out.as_deref(), &render_list(h.components(), output.format))?;
        }
        Command::Blocks { ring, f, k, output } => {
            let cfg = SessionConfig::new(ring.n, ring.order, SummationBudget::default(), output.out)?;
            let f = cfg.series(&f)?;
            let list = match k {
                Some(k) => vec![f.block(k)?],
                None => (0..=cfg.order as u32).map(|k| f.block(k)).collect::<Result<Vec<_>, _>>()?,
            };
            emit(out, cfg.out.as_deref(), &render_list(&list, output.format))?;
        }
        Command::PowBlocks { ring, f, m, output } => {
            let cfg = SessionConfig::new(ring.n, ring.order, SummationBudget::default(), output.out)?;
            let f = cfg.series(&f)?;
            let terms = enumerate_up_to(cfg.n, cfg.order as u32)
                .into_iter()
                .map(|idx| f.pow_block_coefficient(m, &idx).map(|c| (idx, c)))
                .collect::<Result<Vec<_>, _>>()?;
            let assembled = TruncatedSeries::make(cfg.n, i64::from(cfg.order), terms)?;
            emit(out, cfg.out.as_deref(), &render_series(&assembled, output.format))?;
            if assembled != f.pow(m) {
                let _ = writeln!(err, "block assembly differs from repeated multiplication");
                return Ok(EXIT_IDENTITY_FAILED);
            }
        }
        Command::CountIndices { n, k, list } => {
            if n < 1 {
                return Err(CliError::usage("--n must be ≥ 1"));
            }
            let _ = writeln!(out, "{}", multiindex_count(n, k));
            if list {
                for idx in enumerate_degree(n, k) {
                    let _ = writeln!(out, "{idx}");
                }
            }
        }
    }
    Ok(EXIT_OK)
}

/// Runs the CLI on `args` (including the program name) and returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}
