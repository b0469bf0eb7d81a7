use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grid::{GridSpec, RegionFilter};
use super::measure::sup_error_at;
use crate::assembly::{
    approx_smooth, build_taylor_core, choose_delta, mid_network, remove_trifling, TargetFunction, TriflingRegion,
};
use crate::bounds::{bounds, BoundKind, BoundParams, Bounds};
use crate::encoders::{
    bit_extract_cumsum, bit_extract_single, cells_per_axis, point_match, step_function, BitTable, CoefficientVector,
};
use crate::error::{invalid, ForgeError, Result};
use crate::net_ir::{Network, SizeReport};
use crate::primitives::{
    monomial, product_interval, product_multi, product_unit, square_approx, square_k, MultiIndex, SizeBudget,
};

/// Slack added to the error budget of exact constructions, covering rounding only.
pub const EXACT_TOLERANCE: f64 = 1e-9;
/// Slack for the others. Several budgets (`9k(N+1)^{−7kL}` and friends) sit
/// below one ulp of the outputs, where evaluation rounding dominates.
pub const ROUNDOFF_TOLERANCE: f64 = 1e-12;

pub fn tolerance(kind: BoundKind) -> f64 {
    if kind.is_exact() {
        EXACT_TOLERANCE
    } else {
        ROUNDOFF_TOLERANCE
    }
}

/// A named construction with its parameters. Optional fields fall back to
/// defaults documented on each field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    pub kind: BoundKind,
    pub s: u32,
    pub d: usize,
    pub n: usize,
    pub l: usize,
    /// Gap width of `Ω`. Default `1/(3K)` for steps, the modulus rule otherwise.
    pub delta: Option<f64>,
    /// Factor count for `product-multi` (default 2), degree cap for `monomial` (default `‖α‖₁`).
    pub k: Option<usize>,
    /// Exponent for `monomial`, default all ones of length `d`.
    pub alpha: Option<Vec<u32>>,
    /// Interval for `product-interval`, default `[−3, 3]`.
    pub interval: Option<(f64, f64)>,
    /// Bits for the extractors; seeded random when absent.
    pub bits: Option<BitTable>,
    /// Coefficients for `point-match`; seeded random when absent.
    pub coeffs: Option<Vec<f64>>,
}

impl Recipe {
    pub fn new(kind: BoundKind, s: u32, d: usize, n: usize, l: usize) -> Self {
        Self {
            kind,
            s,
            d,
            n,
            l,
            delta: None,
            k: None,
            alpha: None,
            interval: None,
            bits: None,
            coeffs: None,
        }
    }

    pub fn budget(&self) -> Result<SizeBudget> {
        SizeBudget::new(self.n, self.l)
    }

    fn alpha(&self) -> Result<MultiIndex> {
        match &self.alpha {
            Some(a) => MultiIndex::new(a.clone()),
            None => MultiIndex::new(vec![1; self.d]),
        }
    }

    fn product_count(&self) -> usize {
        self.k.unwrap_or(2)
    }

    fn interval(&self) -> (f64, f64) {
        self.interval.unwrap_or((-3.0, 3.0))
    }

    /// Input dimension of the built network.
    pub fn input_dim(&self) -> Result<usize> {
        Ok(match self.kind {
            BoundKind::Smooth | BoundKind::TaylorCore | BoundKind::Gap => self.d,
            BoundKind::Square | BoundKind::Step | BoundKind::BitSingle | BoundKind::PointMatch => 1,
            BoundKind::Product | BoundKind::ProductInterval | BoundKind::BitCumsum => 2,
            BoundKind::ProductMulti => self.product_count(),
            BoundKind::Monomial => self.alpha()?.dim(),
            BoundKind::Mid => 3,
            BoundKind::Corollary => return Err(no_recipe(self.kind)),
        })
    }

    /// Whether the measurement points come from the grid (as opposed to an
    /// exhaustive integer domain).
    pub fn uses_grid(&self) -> bool {
        !matches!(self.kind, BoundKind::BitCumsum | BoundKind::BitSingle | BoundKind::PointMatch)
    }

    fn cumsum_bits(&self, seed: u64) -> Result<BitTable> {
        let (n, l) = (self.n, self.l);
        match &self.bits {
            Some(b) => Ok(b.clone()),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                BitTable::from_rows((0..n * n * l).map(|_| (0..l).map(|_| rng.gen_range(0..2)).collect()).collect())
            }
        }
    }

    fn single_bits(&self, seed: u64) -> Result<BitTable> {
        match &self.bits {
            Some(b) => Ok(b.clone()),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let total = self.n * self.n * self.l * self.l;
                BitTable::flat((0..total).map(|_| rng.gen_range(0..2)).collect())
            }
        }
    }

    /// Check user supplied coefficients without building anything.
    pub fn check_inputs(&self) -> Result<()> {
        if let Some(c) = &self.coeffs {
            CoefficientVector::new(c.clone(), self.s)?;
        }
        Ok(())
    }

    fn point_coeffs(&self, seed: u64) -> Result<CoefficientVector> {
        let xi = match &self.coeffs {
            Some(c) => c.clone(),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..self.n * self.n * self.l * self.l).map(|_| rng.gen::<f64>()).collect()
            }
        };
        CoefficientVector::new(xi, self.s)
    }

    fn target<'t>(&self, target: Option<&'t TargetFunction>) -> Result<&'t TargetFunction> {
        let t = target.ok_or_else(|| invalid("target", format!("kind `{}` needs a target function", self.kind)))?;
        if t.dim() != self.d || t.smoothness() != self.s {
            return Err(invalid(
                "target",
                format!(
                    "target has (d, s) = ({}, {}), recipe asks for ({}, {})",
                    t.dim(),
                    t.smoothness(),
                    self.d,
                    self.s
                ),
            ));
        }
        Ok(t)
    }
}

fn no_recipe(kind: BoundKind) -> ForgeError {
    invalid("kind", format!("`{kind}` is a budget only; it has no network recipe"))
}

/// `f / ‖f‖_{C^s}`, the input of the Taylor construction.
fn normalized(t: &TargetFunction) -> Result<TargetFunction> {
    if t.csnorm() == 0.0 {
        return Err(invalid("csnorm", "the Taylor network needs a nonzero target; the zero target maps to the zero network"));
    }
    Ok(t.scaled(1.0 / t.csnorm()))
}

fn taylor_delta(recipe: &Recipe, g: &TargetFunction) -> Result<f64> {
    match recipe.delta {
        Some(d) => Ok(d),
        None => choose_delta(g, recipe.budget()?),
    }
}

fn step_delta(recipe: &Recipe) -> Result<f64> {
    let k = cells_per_axis(recipe.d, recipe.budget()?);
    Ok(recipe.delta.unwrap_or(1.0 / (3.0 * k as f64)))
}

/// Build the network a recipe names. `seed` drives random bit tables and coefficients.
pub fn build_network(recipe: &Recipe, target: Option<&TargetFunction>, seed: u64) -> Result<Network> {
    let b = recipe.budget()?;
    match recipe.kind {
        BoundKind::Smooth => approx_smooth(recipe.target(target)?, b),
        BoundKind::TaylorCore => {
            let g = normalized(recipe.target(target)?)?;
            Ok(build_taylor_core(&g, b, taylor_delta(recipe, &g)?)?.net)
        }
        BoundKind::Gap => {
            let g = normalized(recipe.target(target)?)?;
            let core = build_taylor_core(&g, b, taylor_delta(recipe, &g)?)?;
            remove_trifling(&core.net, &core.region)
        }
        BoundKind::Square => square_approx(b),
        BoundKind::Product => product_unit(b),
        BoundKind::ProductInterval => {
            let (lo, hi) = recipe.interval();
            product_interval(lo, hi, b)
        }
        BoundKind::ProductMulti => product_multi(recipe.product_count(), b),
        BoundKind::Monomial => {
            let a = recipe.alpha()?;
            let k = recipe.k.unwrap_or((a.order() as usize).max(1));
            monomial(&a, k, b)
        }
        BoundKind::Step => step_function(recipe.d, b, step_delta(recipe)?),
        BoundKind::BitCumsum => bit_extract_cumsum(&recipe.cumsum_bits(seed)?, b),
        BoundKind::BitSingle => bit_extract_single(&recipe.single_bits(seed)?, b),
        BoundKind::PointMatch => point_match(&recipe.point_coeffs(seed)?, b),
        BoundKind::Mid => Ok(mid_network()),
        BoundKind::Corollary => Err(no_recipe(recipe.kind)),
    }
}

/// The parameters a certificate reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertParams {
    pub s: u32,
    pub d: usize,
    pub n: usize,
    pub l: usize,
    pub delta: Option<f64>,
    pub k: Option<usize>,
    pub alpha: Option<Vec<u32>>,
    pub interval: Option<(f64, f64)>,
    pub target: Option<String>,
    pub seed: u64,
}

/// A measured network next to its budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: BoundKind,
    pub params: CertParams,
    pub size: SizeReport,
    pub widthvec: Vec<usize>,
    pub bound: Bounds,
    pub measured: f64,
    pub argmax: Vec<f64>,
    pub samples: usize,
    /// `full-cube`, `exclude-trifling` or `exhaustive`.
    pub domain: String,
    /// Slack on the error comparison.
    pub tolerance: f64,
    /// Lattice spacing, and the finest breakpoint spacing known in closed form.
    /// A pitch above a quarter of that scale may miss the true sup.
    pub pitch: Option<f64>,
    pub breakpoint_scale: Option<f64>,
    pub pitch_ok: Option<bool>,
    pub size_ok: bool,
    pub error_ok: bool,
    pub pass: bool,
    pub wall_time_ms: f64,
}

/// One line of the CSV table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub kind: String,
    pub s: u32,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub width: usize,
    pub depth: usize,
    pub bound: f64,
    pub measured: f64,
    pub pass: bool,
}

pub const CSV_HEADER: [&str; 10] = ["kind", "s", "d", "N", "L", "width", "depth", "bound", "measured", "pass"];

impl Certificate {
    pub fn csv_row(&self) -> CsvRow {
        CsvRow {
            kind: self.kind.to_string(),
            s: self.params.s,
            d: self.params.d,
            n: self.params.n,
            l: self.params.l,
            width: self.size.width,
            depth: self.size.depth,
            bound: self.bound.error,
            measured: self.measured,
            pass: self.pass,
        }
    }

    pub fn verdict(&self) -> &'static str {
        if self.pass {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

/// What a network is measured against.
struct Plan {
    reference: TargetFunction,
    points: Vec<Vec<f64>>,
    domain: &'static str,
    bound: BoundParams,
    delta: Option<f64>,
    pitch: Option<f64>,
    scale: Option<f64>,
}

fn reference(name: &str, d: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Result<TargetFunction> {
    TargetFunction::new(name, d, 1, 1.0, f)
}

fn grid_for(grid: &GridSpec, d: usize) -> Result<GridSpec> {
    if grid.d != d {
        return Err(ForgeError::DimensionMismatch {
            layer: 0,
            expected: d,
            found: grid.d,
        });
    }
    Ok(*grid)
}

fn domain_of(grid: &GridSpec) -> &'static str {
    match grid.region_filter {
        RegionFilter::FullCube => "full-cube",
        RegionFilter::ExcludeTrifling(_) => "exclude-trifling",
    }
}

fn plan(recipe: &Recipe, target: Option<&TargetFunction>, grid: &GridSpec) -> Result<Plan> {
    let b = recipe.budget()?;
    let base = BoundParams::new(recipe.s, recipe.d, recipe.n, recipe.l);
    let dim = recipe.input_dim()?;
    let sq_scale = |n: usize, l: usize| 2f64.powi(-((l * square_k(n)) as i32));
    let on_grid = |reference: TargetFunction, g: GridSpec, bound: BoundParams, scale: Option<f64>, delta: Option<f64>| Plan {
        reference,
        points: g.points(),
        domain: domain_of(&g),
        bound,
        delta,
        pitch: Some(g.pitch()),
        scale,
    };
    let exhaustive = |reference: TargetFunction, points: Vec<Vec<f64>>, bound: BoundParams| Plan {
        reference,
        points,
        domain: "exhaustive",
        bound,
        delta: None,
        pitch: None,
        scale: None,
    };

    Ok(match recipe.kind {
        BoundKind::Smooth => {
            let t = recipe.target(target)?;
            let delta = if t.csnorm() == 0.0 { None } else { Some(taylor_delta(recipe, &normalized(t)?)?) };
            on_grid(t.clone(), grid_for(grid, dim)?, base.with_csnorm(t.csnorm()), delta, delta)
        }
        BoundKind::TaylorCore | BoundKind::Gap => {
            let g = normalized(recipe.target(target)?)?;
            let delta = taylor_delta(recipe, &g)?;
            let region = TriflingRegion::new(recipe.d, cells_per_axis(recipe.d, b), delta)?;
            if recipe.kind == BoundKind::TaylorCore {
                let gr = grid_for(grid, dim)?.excluding(region)?;
                on_grid(g, gr, base, Some(delta), Some(delta))
            } else {
                // budget in terms of the Taylor network actually repaired
                let core = build_taylor_core(&g, b, delta)?;
                let eps = bounds(BoundKind::TaylorCore, &base)?.error;
                let omega = g.modulus(delta).unwrap_or((recipe.d as f64).sqrt() * delta);
                let bp = BoundParams::new(recipe.s, recipe.d, core.net.width(), core.net.depth()).with_gap(eps, omega);
                on_grid(g, grid_for(grid, dim)?, bp, Some(delta), Some(delta))
            }
        }
        BoundKind::Square => on_grid(
            reference("x^2", 1, |x| x[0] * x[0])?,
            grid_for(grid, dim)?,
            base,
            Some(sq_scale(recipe.n, recipe.l)),
            None,
        ),
        BoundKind::Product => on_grid(
            reference("xy", 2, |x| x[0] * x[1])?,
            grid_for(grid, dim)?,
            base,
            Some(sq_scale(recipe.n, recipe.l) / 2.0),
            None,
        ),
        BoundKind::ProductInterval => {
            let (lo, hi) = recipe.interval();
            on_grid(
                reference("xy", 2, |x| x[0] * x[1])?,
                grid_for(grid, dim)?.on_interval(lo, hi)?,
                base.with_interval(lo, hi),
                Some((hi - lo) * sq_scale(recipe.n, recipe.l) / 2.0),
                None,
            )
        }
        BoundKind::ProductMulti => {
            let k = recipe.product_count();
            on_grid(
                reference("product", k, |x| x.iter().product())?,
                grid_for(grid, dim)?,
                base.with_k(k),
                Some(sq_scale(recipe.n + 1, 7 * k * recipe.l) / 2.0),
                None,
            )
        }
        BoundKind::Monomial => {
            let a = recipe.alpha()?;
            let k = recipe.k.unwrap_or((a.order() as usize).max(1));
            let pw = a.clone();
            on_grid(
                reference("monomial", a.dim(), move |x| pw.pow(x))?,
                grid_for(grid, dim)?,
                base.with_k(k),
                Some(sq_scale(recipe.n + 1, 7 * k * recipe.l) / 2.0),
                None,
            )
        }
        BoundKind::Step => {
            let cells = cells_per_axis(recipe.d, b);
            let delta = step_delta(recipe)?;
            let region = TriflingRegion::new(1, cells, delta)?;
            let kf = cells as f64;
            on_grid(
                reference("step", 1, move |x| (x[0] * kf).floor().clamp(0.0, kf - 1.0))?,
                grid_for(grid, dim)?.excluding(region)?,
                base,
                Some(delta),
                Some(delta),
            )
        }
        BoundKind::BitCumsum => {
            let bits = recipe.cumsum_bits(grid.seed)?;
            let pts = (0..bits.rows())
                .flat_map(|m| (0..bits.cols()).map(move |l| vec![m as f64, l as f64]))
                .collect();
            let f = move |x: &[f64]| {
                let (m, l) = (x[0] as usize, x[1] as usize);
                (0..=l).map(|j| f64::from(bits.get(m, j))).sum()
            };
            exhaustive(reference("cumsum", 2, f)?, pts, base)
        }
        BoundKind::BitSingle => {
            let bits = recipe.single_bits(grid.seed)?;
            let pts = (0..bits.as_flat().len()).map(|i| vec![i as f64]).collect();
            exhaustive(reference("bit", 1, move |x| f64::from(bits.as_flat()[x[0] as usize]))?, pts, base)
        }
        BoundKind::PointMatch => {
            let xi = recipe.point_coeffs(grid.seed)?.values().to_vec();
            let pts = (0..xi.len()).map(|i| vec![i as f64]).collect();
            exhaustive(reference("xi", 1, move |x| xi[x[0] as usize])?, pts, base)
        }
        BoundKind::Mid => {
            let g = grid_for(grid, dim)?;
            let g = if g.lo == 0.0 && g.hi == 1.0 { g.on_interval(-10.0, 10.0)? } else { g };
            let mid = |x: &[f64]| {
                let mut v = [x[0], x[1], x[2]];
                v.sort_by(f64::total_cmp);
                v[1]
            };
            on_grid(reference("mid", 3, mid)?, g, base, None, None)
        }
        BoundKind::Corollary => return Err(no_recipe(recipe.kind)),
    })
}

/// Build, measure and compare.
pub fn certify(recipe: &Recipe, target: Option<&TargetFunction>, grid: &GridSpec) -> Result<Certificate> {
    let start = Instant::now();
    let net = build_network(recipe, target, grid.seed)?;
    let mut cert = certify_network(&net, recipe, target, grid)?;
    cert.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(cert)
}

/// Measure an existing network, e.g. one loaded from disk, against a recipe's reference and budget.
pub fn certify_network(
    net: &Network,
    recipe: &Recipe,
    target: Option<&TargetFunction>,
    grid: &GridSpec,
) -> Result<Certificate> {
    let start = Instant::now();
    let plan = plan(recipe, target, grid)?;
    if net.input_dim() != plan.reference.dim() || net.output_dim() != 1 {
        return Err(ForgeError::DimensionMismatch {
            layer: 0,
            expected: plan.reference.dim(),
            found: net.input_dim(),
        });
    }
    let bound = bounds(recipe.kind, &plan.bound)?;
    let sup = sup_error_at(net, &plan.reference, &plan.points)?;
    let size = net.size_report();
    let tol = tolerance(recipe.kind);
    let size_ok = size.width as u64 <= bound.width && size.depth as u64 <= bound.depth;
    let error_ok = sup.measured <= bound.error + tol;
    let pitch_ok = plan.pitch.zip(plan.scale).map(|(p, s)| p <= s / 4.0);
    Ok(Certificate {
        kind: recipe.kind,
        params: CertParams {
            s: recipe.s,
            d: recipe.d,
            n: recipe.n,
            l: recipe.l,
            delta: plan.delta,
            k: match recipe.kind {
                BoundKind::ProductMulti | BoundKind::Monomial => Some(plan.bound.k),
                _ => None,
            },
            alpha: (recipe.kind == BoundKind::Monomial).then(|| recipe.alpha().map(|a| a.entries().to_vec())).transpose()?,
            interval: (recipe.kind == BoundKind::ProductInterval).then(|| recipe.interval()),
            target: match recipe.kind {
                BoundKind::Smooth | BoundKind::TaylorCore | BoundKind::Gap => target.map(|t| t.name().to_string()),
                _ => None,
            },
            seed: grid.seed,
        },
        size,
        widthvec: net.widthvec(),
        bound,
        measured: sup.measured,
        argmax: sup.argmax,
        samples: sup.samples,
        domain: plan.domain.to_string(),
        tolerance: tol,
        pitch: plan.pitch,
        breakpoint_scale: plan.scale,
        pitch_ok,
        size_ok,
        error_ok,
        pass: size_ok && error_ok,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}
