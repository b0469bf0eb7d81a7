use serde::{Deserialize, Serialize};

use crate::error::{invalid, ForgeError, Result};
use crate::net_ir::{compose, pad_depth, parallel, postcompose, precompose, Activation, LayerBuilder, Network};
use crate::primitives::SizeBudget;

use super::bits::{bit_extract_single, BitTable};

/// Values `ξ_i ∈ [0,1]` to be stored at the integers, with smoothness `s`
/// fixing the required accuracy `N^{−2s}L^{−2s}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector {
    xi: Vec<f64>,
    s: u32,
}

impl CoefficientVector {
    pub fn new(xi: Vec<f64>, s: u32) -> Result<Self> {
        if xi.is_empty() {
            return Err(ForgeError::Empty("coefficient vector"));
        }
        if s == 0 {
            return Err(invalid("s", "must be at least 1"));
        }
        if let Some(i) = xi.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(invalid("xi", format!("xi[{i}] = {} is outside [0, 1]", xi[i])));
        }
        Ok(Self { xi, s })
    }

    pub fn values(&self) -> &[f64] {
        &self.xi
    }

    pub fn smoothness(&self) -> u32 {
        self.s
    }
}

/// How `ξ` is cut to `J` binary digits.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BitRounding {
    /// Closest `J`-digit value, error ≤ `2^{−J−1}`.
    #[default]
    Nearest,
    /// Drop the tail, error < `2^{−J}`.
    TowardZero,
}

/// Smallest `J` with `2^J ≥ (NL+1)^{2s}`.
pub fn bit_count(budget: SizeBudget, s: u32) -> Result<u32> {
    let base = (budget.n as u128)
        .checked_mul(budget.l as u128)
        .and_then(|v| v.checked_add(1))
        .ok_or_else(|| invalid("N·L", "too large"))?;
    let mut need: u128 = 1;
    for _ in 0..2 * s {
        need = need
            .checked_mul(base)
            .filter(|&v| v <= 1u128 << 64)
            .ok_or_else(|| invalid("s", format!("(NL+1)^{} needs more than 60 bits", 2 * s)))?;
    }
    let j = (128 - (need - 1).leading_zeros()).max(1);
    if j > 60 {
        return Err(invalid("s", format!("(NL+1)^{} needs {j} bits, more than 60", 2 * s)));
    }
    Ok(j)
}

/// `J`-digit code of `ξ`, as an integer in `[0, 2^J − 1]`. `ξ = 1` has no
/// such code and becomes `1 − 2^{−J}`.
pub fn quantize(xi: f64, j: u32, rounding: BitRounding) -> u64 {
    let top = (1u64 << j) - 1;
    let scaled = xi * (1u64 << j) as f64;
    let q = match rounding {
        BitRounding::Nearest => scaled.round(),
        BitRounding::TowardZero => scaled.floor(),
    };
    (q.max(0.0) as u64).min(top)
}

/// Extractors per stage in the grid layout.
fn per_stage(n: usize, s: u32) -> usize {
    let lg = usize::BITS - (4 * n - 1).leading_zeros();
    2 * s as usize * lg as usize
}

/// `φ(i) ≈ ξ_i` within `N^{−2s}L^{−2s}` at each `i < len`, `0 ≤ φ ≤ 1` everywhere,
/// width ≤ `16s(N+1)log₂(8N)`, depth ≤ `5(L+2)log₂(4L)`.
pub fn point_match(coeffs: &CoefficientVector, budget: SizeBudget) -> Result<Network> {
    point_match_with(coeffs, budget, BitRounding::default())
}

/// [`point_match`] with an explicit rounding rule.
///
/// Each `ξ_i` is cut to `J` bits and bit `j` gets its own single-bit extractor.
/// The extractors run `2s⌈log₂4N⌉` side by side per stage; stages run one
/// after another, each carrying the index and the partial sum `Σ 2^{−j}θ_j`.
/// A final layer clamps to `[0, 1]`.
pub fn point_match_with(coeffs: &CoefficientVector, budget: SizeBudget, rounding: BitRounding) -> Result<Network> {
    let (n, l) = (budget.n, budget.l);
    let total = n * n * l * l;
    let xi = coeffs.values();
    if xi.len() > total {
        return Err(invalid("xi", format!("{} coefficients exceed N²L² = {total}", xi.len())));
    }
    let j_bits = bit_count(budget, coeffs.smoothness())? as usize;
    let codes: Vec<u64> = xi.iter().map(|&v| quantize(v, j_bits as u32, rounding)).collect();
    let bit = |i: usize, j: usize| -> u8 { codes.get(i).map_or(0, |c| ((c >> (j_bits - 1 - j)) & 1) as u8) };

    let per = per_stage(n, coeffs.smoothness()).min(j_bits);
    let mut net: Option<Network> = None;
    for start in (0..j_bits).step_by(per) {
        let end = (start + per).min(j_bits);
        let in_dim = if start == 0 { 1 } else { 2 };
        let mut branches = Vec::with_capacity(end - start + 2);
        for j in start..end {
            let table = BitTable::flat((0..total).map(|i| bit(i, j)).collect())?;
            let ext = bit_extract_single(&table, budget)?;
            branches.push(precompose(&ext, in_dim, &[(vec![(0, 1.0)], 0.0)])?);
        }
        let depth = branches[0].depth();
        branches.push(pad_depth(&Network::projection(in_dim, &[0]), depth, &[true])?);
        if start > 0 {
            branches.push(pad_depth(&Network::projection(in_dim, &[1]), depth, &[true])?);
        }
        let stage = parallel(&branches, true)?;
        let k = end - start;
        let mut acc: Vec<(usize, f64)> = (0..k).map(|t| (t, 0.5f64.powi((start + t + 1) as i32))).collect();
        if start > 0 {
            acc.push((k + 1, 1.0));
        }
        let stage = postcompose(&stage, &[(vec![(k, 1.0)], 0.0), (acc, 0.0)])?;
        net = Some(match net {
            None => stage,
            Some(prev) => compose(&stage, &prev)?,
        });
    }
    let body = postcompose(&net.expect("J ≥ 1"), &[(vec![(1, 1.0)], 0.0)])?;
    // min(max(a, 0), 1) = σ(a) − σ(a − 1)
    let mut hidden = LayerBuilder::new(1);
    hidden.row(&[(0, 1.0)], 0.0);
    hidden.row(&[(0, 1.0)], -1.0);
    let mut out = LayerBuilder::new(2);
    out.row(&[(0, 1.0), (1, -1.0)], 0.0);
    let clamp = Network::new(1, vec![hidden.build(Activation::Relu), out.build(Activation::Identity)])?;
    compose(&clamp, &body)
}
