use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use relu_forge::assembly::presets;
use relu_forge::net_ir::serial;
use relu_forge::verify::{build_network, certify, certify_network, Certificate, CsvRow, GridSpec, Recipe};
use relu_forge::{bounds, BoundKind, BoundParams, TargetFunction};

use crate::args::{BuildArgs, CertifyArgs, RecipeArgs, SweepArgs};
use crate::inputs::{read_bits, read_coeffs};

/// Lattice points used when `--grid` is absent.
pub const DEFAULT_GRID_POINTS: usize = 100_000;

/// Bad input, reported before anything is built. Exit code 2.
#[derive(Debug)]
pub struct Invalid(pub anyhow::Error);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for Invalid {}

fn invalid(e: impl Into<anyhow::Error>) -> anyhow::Error {
    anyhow::Error::new(Invalid(e.into()))
}

/// A checked recipe with its target, ready to build.
pub struct Plan {
    pub recipe: Recipe,
    pub target: Option<TargetFunction>,
    pub seed: u64,
}

fn needs_target(kind: BoundKind) -> bool {
    matches!(kind, BoundKind::Smooth | BoundKind::TaylorCore | BoundKind::Gap)
}

/// Turn flags into a recipe, checking everything that can be checked without building.
pub fn plan(args: &RecipeArgs, n: usize, l: usize) -> Result<Plan> {
    let kind: BoundKind = args.kind.parse().map_err(invalid)?;
    if kind == BoundKind::Corollary {
        return Err(invalid(anyhow!("`corollary` is a budget only; build `smooth` instead")));
    }
    let mut recipe = Recipe::new(kind, args.s, args.d, n, l);
    recipe.delta = args.delta;
    recipe.k = args.k;
    recipe.alpha = args.alpha.clone();
    recipe.interval = args.interval;
    if let Some(p) = &args.bits {
        recipe.bits = Some(read_bits(p).map_err(invalid)?);
    }
    if let Some(p) = &args.coeffs {
        recipe.coeffs = Some(read_coeffs(p).map_err(invalid)?);
    }
    if let Some(delta) = args.delta {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(invalid(anyhow!("--delta must be positive, got {delta}")));
        }
    }
    let target = if needs_target(kind) {
        let name = args
            .target
            .as_deref()
            .ok_or_else(|| invalid(anyhow!("--kind {kind} needs --target (one of {})", presets::PRESET_NAMES.join(", "))))?;
        Some(presets::preset(name, args.d, args.s).map_err(invalid)?)
    } else {
        None
    };
    let mut bp = BoundParams::new(args.s, args.d, n, l);
    if let Some((a, b)) = recipe.interval {
        bp = bp.with_interval(a, b);
    }
    if let Some(k) = recipe.k {
        bp = bp.with_k(k);
    }
    bounds(kind, &bp).map_err(invalid)?;
    recipe.input_dim().map_err(invalid)?;
    recipe.check_inputs().map_err(invalid)?;
    Ok(Plan {
        recipe,
        target,
        seed: args.seed,
    })
}

pub fn grid_for(recipe: &Recipe, per_axis: Option<usize>, seed: u64) -> Result<GridSpec> {
    let d = recipe.input_dim().map_err(invalid)?;
    match per_axis {
        Some(m) => GridSpec::new(d, m, seed),
        None => GridSpec::with_total(d, DEFAULT_GRID_POINTS, seed),
    }
    .map_err(invalid)
}

pub fn cmd_build(args: &BuildArgs) -> Result<bool> {
    let p = plan(&args.recipe, args.n, args.l)?;
    let net = build_network(&p.recipe, p.target.as_ref(), p.seed)?;
    serial::save(&net, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    let r = net.size_report();
    println!(
        "{} N={} L={}: width {} depth {} params {} widthvec {:?} -> {}",
        p.recipe.kind,
        args.n,
        args.l,
        r.width,
        r.depth,
        r.params,
        net.widthvec(),
        args.out.display()
    );
    Ok(true)
}

fn describe(c: &Certificate) -> String {
    format!(
        "{} {} N={} L={}: measured {:.3e} {} bound {:.3e}; size ({}, {}) vs ({}, {}); {} samples ({}), argmax {:?}",
        c.verdict(),
        c.kind,
        c.params.n,
        c.params.l,
        c.measured,
        if c.error_ok { "<=" } else { ">" },
        c.bound.error,
        c.size.width,
        c.size.depth,
        c.bound.width,
        c.bound.depth,
        c.samples,
        c.domain,
        c.argmax
    )
}

fn write_csv(path: Option<&Path>, rows: &[CsvRow]) -> Result<()> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: serde::Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let f = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(f, value)?;
    Ok(())
}

pub fn cmd_certify(args: &CertifyArgs) -> Result<bool> {
    let p = plan(&args.recipe, args.n, args.l)?;
    let grid = grid_for(&p.recipe, args.grid, p.seed)?;
    let cert = match &args.net {
        Some(path) => {
            let net = serial::load(path).map_err(invalid)?;
            certify_network(&net, &p.recipe, p.target.as_ref(), &grid)?
        }
        None => certify(&p.recipe, p.target.as_ref(), &grid)?,
    };
    println!("{}", describe(&cert));
    if let Some(out) = &args.out {
        write_json(out, &cert)?;
    }
    if let Some(csv) = &args.csv {
        write_csv(Some(csv), &[cert.csv_row()])?;
    }
    Ok(cert.pass)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<bool> {
    if args.n.0.is_empty() || args.l.0.is_empty() {
        return Err(invalid(anyhow!("empty --N or --L range")));
    }
    // validate every pair before the first build
    let mut plans = Vec::new();
    for &n in &args.n.0 {
        for &l in &args.l.0 {
            plans.push(plan(&args.recipe, n, l)?);
        }
    }
    let mut rows = Vec::with_capacity(plans.len());
    let mut certs = Vec::with_capacity(plans.len());
    let mut all_pass = true;
    for p in &plans {
        let grid = grid_for(&p.recipe, args.grid, p.seed)?;
        match certify(&p.recipe, p.target.as_ref(), &grid) {
            Ok(c) => {
                eprintln!("{}", describe(&c));
                all_pass &= c.pass;
                rows.push(c.csv_row());
                certs.push(c);
            }
            Err(e) => {
                eprintln!("FAIL {} N={} L={}: {e}", p.recipe.kind, p.recipe.n, p.recipe.l);
                all_pass = false;
                rows.push(CsvRow {
                    kind: p.recipe.kind.to_string(),
                    s: p.recipe.s,
                    d: p.recipe.d,
                    n: p.recipe.n,
                    l: p.recipe.l,
                    width: 0,
                    depth: 0,
                    bound: f64::NAN,
                    measured: f64::NAN,
                    pass: false,
                });
            }
        }
    }
    write_csv(args.csv.as_deref(), &rows)?;
    if let Some(out) = &args.out {
        write_json(out, &certs)?;
    }
    Ok(all_pass)
}

/// `RELU_FORGE_THREADS` caps the worker pool.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("RELU_FORGE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| invalid(anyhow!("RELU_FORGE_THREADS must be a positive integer, got `{v}`")))?;
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
        bail!("thread pool: {e}");
    }
    Ok(())
}
