use super::mid::remove_trifling;
use super::target::TargetFunction;
use super::taylor::{build_taylor_core, TaylorCore};
use super::trifling::TriflingRegion;
use crate::encoders::cells_per_axis;
use crate::error::{invalid, Result};
use crate::net_ir::{postcompose, Network};
use crate::primitives::SizeBudget;

/// `N^{−2s/d} L^{−2s/d}`.
pub fn rate(d: usize, s: u32, budget: SizeBudget) -> f64 {
    let p = -2.0 * f64::from(s) / d as f64;
    (budget.n as f64).powf(p) * (budget.l as f64).powf(p)
}

/// Largest `δ ≤ 1/(3K)` with `d·ω(δ) ≤ N^{−2s/d}L^{−2s/d}` for the normalized target.
///
/// With a modulus oracle this bisects; without one it uses the Lipschitz
/// bound `ω(δ) ≤ √d δ` of the unit `C¹` ball.
pub fn choose_delta(normalized: &TargetFunction, budget: SizeBudget) -> Result<f64> {
    let (d, s) = (normalized.dim(), normalized.smoothness());
    let cap = 1.0 / (3.0 * cells_per_axis(d, budget) as f64);
    let goal = rate(d, s, budget);
    let df = d as f64;
    if !normalized.has_modulus() {
        return Ok(cap.min(goal / df.powf(1.5)));
    }
    let ok = |delta: f64| df * normalized.modulus(delta).expect("checked") <= goal;
    if ok(cap) {
        return Ok(cap);
    }
    let (mut lo, mut hi) = (0.0, cap);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo > 0.0 {
        Ok(lo)
    } else {
        Err(invalid("delta", "no positive δ satisfies d·ω(δ) ≤ N^{−2s/d}L^{−2s/d}"))
    }
}

/// Everything produced on the way to the smooth approximant.
#[derive(Debug, Clone)]
pub struct SmoothApprox {
    /// Final network approximating `f` on all of `[0,1]^d`.
    pub net: Network,
    /// Taylor network for `f / csnorm`, accurate off the trifling region.
    /// `None` for the zero target.
    pub core: Option<TaylorCore>,
    pub delta: f64,
    pub csnorm: f64,
}

impl SmoothApprox {
    pub fn region(&self) -> Option<TriflingRegion> {
        self.core.as_ref().map(|c| c.region)
    }
}

/// Approximate `f` on `[0,1]^d`: normalize by the `C^s` norm, build the
/// Taylor network, repair the trifling region, scale back.
pub fn approx_smooth(f: &TargetFunction, budget: SizeBudget) -> Result<Network> {
    Ok(approx_smooth_detailed(f, budget)?.net)
}

pub fn approx_smooth_detailed(f: &TargetFunction, budget: SizeBudget) -> Result<SmoothApprox> {
    let c = f.csnorm();
    if c == 0.0 {
        return Ok(SmoothApprox {
            net: Network::zero(f.dim(), 1),
            core: None,
            delta: 0.0,
            csnorm: 0.0,
        });
    }
    let normalized = f.scaled(1.0 / c);
    let delta = choose_delta(&normalized, budget)?;
    let core = build_taylor_core(&normalized, budget, delta)?;
    let repaired = remove_trifling(&core.net, &core.region)?;
    let net = postcompose(&repaired, &[(vec![(0, c)], 0.0)])?;
    Ok(SmoothApprox {
        net,
        core: Some(core),
        delta,
        csnorm: c,
    })
}
