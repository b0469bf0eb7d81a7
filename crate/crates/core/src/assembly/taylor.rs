use serde::{Deserialize, Serialize};

use super::target::TargetFunction;
use super::trifling::{CellIndex, TriflingRegion};
use crate::encoders::{cells_per_axis, point_match, step_function, CoefficientVector};
use crate::error::{invalid, Result};
use crate::net_ir::{compose, pad_depth, parallel, postcompose, precompose, Network};
use crate::primitives::{monomial, product_interval, MultiIndex, SizeBudget};

/// How far a coefficient may stray outside `[0,1]` before it counts as a
/// norm violation rather than rounding.
const XI_SLACK: f64 = 1e-9;

/// Everything the Taylor network stores: the grid, the multi-indices
/// `‖α‖₁ ≤ s−1` in lexicographic order and `ξ_{α,i} = (∂^α f(η(i)/K) + 1)/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorPlan {
    pub d: usize,
    pub s: u32,
    pub k: usize,
    pub delta: f64,
    pub alphas: Vec<MultiIndex>,
    pub xi: Vec<Vec<f64>>,
}

impl TaylorPlan {
    /// Needs `‖∂^α f‖_∞ ≤ 1` for `‖α‖₁ ≤ s−1`; values outside `[0,1]` beyond
    /// rounding are rejected.
    pub fn new(f: &TargetFunction, budget: SizeBudget, delta: f64) -> Result<Self> {
        let (d, s) = (f.dim(), f.smoothness());
        let k = cells_per_axis(d, budget);
        TriflingRegion::new(d, k, delta)?;
        let cells = k.pow(d as u32);
        let alphas = MultiIndex::all_up_to(d, s - 1);
        let mut xi = Vec::with_capacity(alphas.len());
        for a in &alphas {
            let mut row = Vec::with_capacity(cells);
            for i in 0..cells {
                let at = CellIndex::unflatten(i, d, k).anchor(k);
                let v = (f.deriv(a, &at)? + 1.0) / 2.0;
                if !(-XI_SLACK..=1.0 + XI_SLACK).contains(&v) {
                    return Err(invalid(
                        "csnorm",
                        format!("|∂^{:?} f| exceeds 1 at {at:?}; normalize the target first", a.entries()),
                    ));
                }
                row.push(v.clamp(0.0, 1.0));
            }
            xi.push(row);
        }
        Ok(Self { d, s, k, delta, alphas, xi })
    }

    pub fn region(&self) -> TriflingRegion {
        TriflingRegion::new(self.d, self.k, self.delta).expect("validated on construction")
    }
}

/// The three error terms `E₁ = 216(N+1)^{−2s(L+1)}`, `E₂ = 9s(N+1)^{−7sL}`,
/// `E₃ = 2N^{−2s}L^{−2s}` and the total `(s+1)^d(K^{−s} + 3E₁ + E₂ + 3E₃)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub total: f64,
}

pub fn error_budget(d: usize, s: u32, budget: SizeBudget) -> ErrorBudget {
    let (n, l) = (budget.n as f64, budget.l as f64);
    let si = s as i32;
    let sf = f64::from(s);
    let e1 = 216.0 * (n + 1.0).powf(-2.0 * sf * (l + 1.0));
    let e2 = 9.0 * sf * (n + 1.0).powf(-7.0 * sf * l);
    let e3 = 2.0 * n.powi(-2 * si) * l.powi(-2 * si);
    let k = cells_per_axis(d, budget) as f64;
    let total = (sf + 1.0).powi(d as i32) * (k.powi(-si) + 3.0 * e1 + e2 + 3.0 * e3);
    ErrorBudget { e1, e2, e3, total }
}

/// The Taylor network, accurate off the trifling region.
#[derive(Debug, Clone)]
pub struct TaylorCore {
    pub net: Network,
    pub region: TriflingRegion,
    pub plan: TaylorPlan,
}

/// `φ(x) = Σ_α φ_mult(φ_α(Ψ(x))/α!, P_α(x − Ψ(x)))` for `‖α‖₁ ≤ s−1`.
///
/// `Ψ` is built once and shared by every branch. Each `φ_α` is `2·point_match − 1`
/// read at `i = Σ β_j K^j`, `P_α` a monomial network on the local offset, and
/// `φ_mult` multiplies on `[−3,3]` with budget `(N+1, 2s(L+1))`.
pub fn build_taylor_core(f: &TargetFunction, budget: SizeBudget, delta: f64) -> Result<TaylorCore> {
    let plan = TaylorPlan::new(f, budget, delta)?;
    let (d, s, k) = (plan.d, plan.s, plan.k);
    let kf = k as f64;

    // stage 1: x ↦ (β, x)
    let mut parts = Vec::with_capacity(d + 1);
    let step = step_function(d, budget, delta)?;
    for j in 0..d {
        parts.push(compose(&step, &Network::projection(d, &[j]))?);
    }
    let depth1 = parts[0].depth();
    parts.push(pad_depth(&Network::identity(d), depth1, &vec![true; d])?);
    let stage1 = parallel(&parts, true)?;

    // stage 2: (β, x) ↦ (ξ̃_α, P_α(h)) per α
    let index_row = vec![((0..d).map(|j| (j, kf.powi(j as i32))).collect::<Vec<_>>(), 0.0)];
    let offset_rows: Vec<_> = (0..d).map(|j| (vec![(d + j, 1.0), (j, -1.0 / kf)], 0.0)).collect();
    let mut branches = Vec::with_capacity(2 * plan.alphas.len());
    for (a, xi) in plan.alphas.iter().zip(&plan.xi) {
        let pm = point_match(&CoefficientVector::new(xi.clone(), s)?, budget)?;
        branches.push(precompose(&pm, 2 * d, &index_row)?);
        let mono = monomial(a, s as usize, budget)?;
        branches.push(precompose(&mono, 2 * d, &offset_rows)?);
    }
    let depth2 = branches.iter().map(Network::depth).max().unwrap_or(0);
    // both outputs of every branch are nonnegative where it matters, so one channel each
    let branches: Vec<Network> = branches
        .iter()
        .map(|b| pad_depth(b, depth2, &[true]))
        .collect::<Result<_>>()?;
    let stage2 = parallel(&branches, true)?;

    // stage 3: Σ_α φ_mult((2ξ̃_α − 1)/α!, P_α)
    let mult = product_interval(-3.0, 3.0, SizeBudget::new(budget.n + 1, 2 * s as usize * (budget.l + 1))?)?;
    let width = 2 * plan.alphas.len();
    let mut products = Vec::with_capacity(plan.alphas.len());
    for (t, a) in plan.alphas.iter().enumerate() {
        let fact = a.factorial();
        let rows = [(vec![(2 * t, 2.0 / fact)], -1.0 / fact), (vec![(2 * t + 1, 1.0)], 0.0)];
        products.push(precompose(&mult, width, &rows)?);
    }
    let sum: Vec<(usize, f64)> = (0..products.len()).map(|t| (t, 1.0)).collect();
    let stage3 = postcompose(&parallel(&products, true)?, &[(sum, 0.0)])?;

    let net = compose(&stage3, &compose(&stage2, &stage1)?)?;
    let region = plan.region();
    Ok(TaylorCore { net, region, plan })
}
