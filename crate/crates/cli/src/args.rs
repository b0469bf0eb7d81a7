use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "relu-forge", version, about = "Build ReLU networks from named recipes and certify their sup error")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a network and write it as JSON.
    Build(BuildArgs),
    /// Build (or load) a network, measure its sup error and compare with the budget.
    Certify(CertifyArgs),
    /// Certify every (N, L) pair in a range and write one CSV row each.
    Sweep(SweepArgs),
}

/// Recipe flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct RecipeArgs {
    /// square, product, product-interval, product-multi, monomial, step,
    /// bit-cumsum, bit-single, point-match, mid, taylor-core, gap or smooth.
    #[arg(long)]
    pub kind: String,
    /// Smoothness order.
    #[arg(long = "s", default_value_t = 1)]
    pub s: u32,
    /// Input dimension.
    #[arg(long = "d", default_value_t = 1)]
    pub d: usize,
    #[arg(long = "delta")]
    pub delta: Option<f64>,
    /// Target preset: constant, linear, monomial, sinpi, gauss-bump.
    #[arg(long)]
    pub target: Option<String>,
    /// Exponent for `monomial`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<u32>>,
    /// Factor count for `product-multi`, degree cap for `monomial`.
    #[arg(long = "k")]
    pub k: Option<usize>,
    /// Interval `a,b` for `product-interval`.
    #[arg(long, value_parser = parse_interval, allow_hyphen_values = true)]
    pub interval: Option<(f64, f64)>,
    /// Bit table for the extractors (JSON or CSV of 0/1).
    #[arg(long)]
    pub bits: Option<PathBuf>,
    /// Coefficients for `point-match` (JSON array or CSV of reals).
    #[arg(long)]
    pub coeffs: Option<PathBuf>,
    /// Seed for random tables and grid jitter.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub recipe: RecipeArgs,
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long = "L")]
    pub l: usize,
    /// Where to write the network.
    #[arg(short = 'o', long = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub recipe: RecipeArgs,
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long = "L")]
    pub l: usize,
    /// Lattice points per axis; about 10^5 points in total by default.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Certify this network file instead of building one.
    #[arg(long)]
    pub net: Option<PathBuf>,
    /// Certificate JSON.
    #[arg(short = 'o', long = "out")]
    pub out: Option<PathBuf>,
    /// Certificate CSV (header plus one row).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub recipe: RecipeArgs,
    /// Range such as `1..3`, `1..=3` or `1,2,4`.
    #[arg(long = "N", value_parser = parse_range)]
    pub n: Span,
    #[arg(long = "L", value_parser = parse_range)]
    pub l: Span,
    #[arg(long)]
    pub grid: Option<usize>,
    /// Certificates as a JSON array.
    #[arg(short = 'o', long = "out")]
    pub out: Option<PathBuf>,
    /// CSV table; printed to stdout when absent.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Budget values swept over, in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Span(pub Vec<usize>);

/// `a..b` and `a..=b` are both inclusive; `a` alone is a single value.
pub fn parse_range(s: &str) -> Result<Span, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let r: RangeInclusive<usize> = num(a)?..=num(b)?;
        return Ok(Span(r.collect()));
    }
    s.split(',').filter(|t| !t.trim().is_empty()).map(num).collect::<Result<_, _>>().map(Span)
}

/// `a,b` with `a < b`.
pub fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `a,b`, got `{s}`"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    let (a, b) = (num(a)?, num(b)?);
    if a < b {
        Ok((a, b))
    } else {
        Err(format!("need a < b, got [{a}, {b}]"))
    }
}
