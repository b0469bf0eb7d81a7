//! The polynomial tower: sawtooth teeth, squares, products, monomials.

mod multi_index;

pub use multi_index::MultiIndex;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, ForgeError, Result};
use crate::net_ir::{
    collapse_identity_layers, compose, pad_depth, parallel, postcompose, precompose, Activation, LayerBuilder,
    Network,
};

/// Width and depth knobs `(N, L)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeBudget {
    pub n: usize,
    pub l: usize,
}

impl SizeBudget {
    pub fn new(n: usize, l: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("N", "must be at least 1"));
        }
        if l == 0 {
            return Err(invalid("L", "must be at least 1"));
        }
        Ok(Self { n, l })
    }
}

/// The `k` with `(k−1)2^{k−1} + 1 ≤ N ≤ k 2^k`, found by scanning.
pub fn square_k(n: usize) -> usize {
    let mut k = 1usize;
    loop {
        let lo = (k - 1) * (1usize << (k - 1)) + 1;
        let hi = k * (1usize << k);
        if lo <= n && n <= hi {
            return k;
        }
        k += 1;
    }
}

/// One hidden layer of width `2^i` computing the sawtooth `T_i` on `[0,1]`:
/// `T_i(x) = σ(2^i x) + Σ_{m=1}^{2^i−1} 2(−1)^m σ(2^i x − m)`.
/// Nothing is promised outside `[0,1]`.
pub fn sawtooth(i: u32) -> Result<Network> {
    if i == 0 || i > 24 {
        return Err(invalid("i", "sawtooth index must be in 1..=24"));
    }
    let teeth = 1usize << i;
    let scale = teeth as f64;
    let mut hidden = LayerBuilder::new(1);
    let mut out = Vec::with_capacity(teeth);
    for m in 0..teeth {
        hidden.row(&[(0, scale)], -(m as f64));
        let w = if m == 0 {
            1.0
        } else if m % 2 == 1 {
            -2.0
        } else {
            2.0
        };
        out.push((m, w));
    }
    let mut output = LayerBuilder::new(teeth);
    output.row(&out, 0.0);
    Network::new(1, vec![hidden.build(Activation::Relu), output.build(Activation::Identity)])
}

/// The square approximant before identity layers are merged: `2L` layers,
/// alternating a ReLU layer of sawtooth pieces with an identity layer that
/// updates `(y, acc) = (T_{ℓk}(x), f_{ℓk}(x))`.
pub fn square_approx_raw(budget: SizeBudget) -> Result<Network> {
    let k = square_k(budget.n);
    let mut layers = Vec::with_capacity(2 * budget.l);
    for block in 0..budget.l {
        // inputs: x on the first block, else (y, acc)
        let in_dim = if block == 0 { 1 } else { 2 };
        let (y_col, acc_col) = if block == 0 { (0, 0) } else { (0, 1) };
        let mut hidden = LayerBuilder::new(in_dim);
        // group_start[j-1] = first unit of the T_j group
        let mut group_start = Vec::with_capacity(k);
        for j in 1..=k {
            let teeth = 1usize << j;
            group_start.push(hidden.len());
            for m in 0..teeth {
                hidden.row(&[(y_col, teeth as f64)], -(m as f64));
            }
        }
        let acc_unit = hidden.row(&[(acc_col, 1.0)], 0.0);
        let width = hidden.len();
        layers.push(hidden.build(Activation::Relu));

        let tooth = |j: usize| -> Vec<(usize, f64)> {
            let start = group_start[j - 1];
            (0..(1usize << j))
                .map(|m| {
                    let w = if m == 0 {
                        1.0
                    } else if m % 2 == 1 {
                        -2.0
                    } else {
                        2.0
                    };
                    (start + m, w)
                })
                .collect()
        };
        let mut update = LayerBuilder::new(width);
        let last = block + 1 == budget.l;
        if !last {
            update.row(&tooth(k), 0.0);
        }
        let mut acc_terms = vec![(acc_unit, 1.0)];
        for j in 1..=k {
            let level = (block * k + j) as i32;
            let c = 0.25f64.powi(level);
            acc_terms.extend(tooth(j).into_iter().map(|(u, w)| (u, -c * w)));
        }
        update.row(&acc_terms, 0.0);
        layers.push(update.build(Activation::Identity));
    }
    Network::new(1, layers)
}

/// `φ = f_{Lk}` interpolating `x²` at the dyadic points `j/2^{Lk}`:
/// width `2^{k+1} − 1 ≤ 3N`, depth `L`, `0 ≤ φ(x) − x² ≤ 2^{−2(Lk+1)} ≤ N^{−L}` on `[0,1]`.
pub fn square_approx(budget: SizeBudget) -> Result<Network> {
    Ok(collapse_identity_layers(&square_approx_raw(budget)?))
}

/// `xy ≈ 2(ψ((x+y)/2) − ψ(x/2) − ψ(y/2))` on `[0,1]²`: width ≤ 9N, depth L, error ≤ 6N^{−L}.
pub fn product_unit(budget: SizeBudget) -> Result<Network> {
    let psi = square_approx(budget)?;
    let mean = precompose(&psi, 2, &[(vec![(0, 0.5), (1, 0.5)], 0.0)])?;
    let half_x = precompose(&psi, 2, &[(vec![(0, 0.5)], 0.0)])?;
    let half_y = precompose(&psi, 2, &[(vec![(1, 0.5)], 0.0)])?;
    let p = parallel(&[mean, half_x, half_y], true)?;
    postcompose(&p, &[(vec![(0, 2.0), (1, -2.0), (2, -2.0)], 0.0)])
}

/// `xy` on `[a,b]²`: width ≤ 9N+1, depth L, error ≤ 6(b−a)²N^{−L}.
///
/// `(b−a)² ψ((x−a)/(b−a), (y−a)/(b−a)) + a·σ(x+y+2|a|) − a² − 2a|a|`, with
/// the σ term carried on one channel.
pub fn product_interval(a: f64, b: f64, budget: SizeBudget) -> Result<Network> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(invalid("interval", format!("need finite a < b, got [{a}, {b}]")));
    }
    let w = b - a;
    let unit = product_unit(budget)?;
    let scaled = precompose(&unit, 2, &[(vec![(0, 1.0 / w)], -a / w), (vec![(1, 1.0 / w)], -a / w)])?;
    let shift = Network::linear(2, &[(vec![(0, 1.0), (1, 1.0)], 2.0 * a.abs())]);
    let shift = pad_depth(&shift, scaled.depth(), &[true])?;
    let p = parallel(&[scaled, shift], true)?;
    postcompose(&p, &[(vec![(0, w * w), (1, a)], -a * a - 2.0 * a * a.abs())])
}

/// Product of `k ≥ 2` inputs in `[0,1]`: width ≤ 9(N+1)+k−1, depth ≤ 7kL(k−1),
/// error ≤ 9(k−1)(N+1)^{−7kL}.
///
/// `φ_{i+1} = φ₁(φ_i, x_{i+2})` where `φ₁` multiplies on `[−0.1, 1.1]` with
/// budget `(N+1, 7kL)`; inputs not yet consumed ride along on one channel each.
pub fn product_multi(k: usize, budget: SizeBudget) -> Result<Network> {
    if k < 2 {
        return Err(invalid("k", "product needs at least two factors"));
    }
    let inner = SizeBudget::new(budget.n + 1, 7 * k * budget.l)?;
    let phi1 = product_interval(-0.1, 1.1, inner)?;
    let mut net: Option<Network> = None;
    for stage in 0..k - 1 {
        // stage input: (running product, remaining factors...)
        let dim = k - stage;
        let mult = precompose(&phi1, dim, &[(vec![(0, 1.0)], 0.0), (vec![(1, 1.0)], 0.0)])?;
        let stage_net = if dim > 2 {
            let rest: Vec<usize> = (2..dim).collect();
            let carry = pad_depth(&Network::projection(dim, &rest), mult.depth(), &vec![true; rest.len()])?;
            parallel(&[mult, carry], true)?
        } else {
            mult
        };
        net = Some(match net {
            None => stage_net,
            Some(prev) => compose(&stage_net, &prev)?,
        });
    }
    Ok(net.expect("k ≥ 2 gives at least one stage"))
}

/// `x^α` on `[0,1]^d` with degree cap `k`: width ≤ 9(N+1)+k−1, depth ≤ 7k²L,
/// error ≤ 9k(N+1)^{−7kL}. Orders 0 and 1 are exact affine networks.
pub fn monomial(alpha: &MultiIndex, k: usize, budget: SizeBudget) -> Result<Network> {
    let d = alpha.dim();
    let order = alpha.order() as usize;
    if order > k {
        return Err(invalid("alpha", format!("order {order} exceeds degree cap {k}")));
    }
    match order {
        0 => return Ok(Network::linear(d, &[(Vec::new(), 1.0)])),
        1 => {
            let j = alpha.entries().iter().position(|&a| a == 1).expect("order one");
            return Ok(Network::projection(d, &[j]));
        }
        _ => {}
    }
    // duplicate x_j α_j times, pad with ones up to k factors
    let mut rows = Vec::with_capacity(k);
    for (j, &a) in alpha.entries().iter().enumerate() {
        for _ in 0..a {
            rows.push((vec![(j, 1.0)], 0.0));
        }
    }
    while rows.len() < k {
        rows.push((Vec::new(), 1.0));
    }
    precompose(&product_multi(k, budget)?, d, &rows)
}

/// `Σ c_i x^{α_i}` as parallel monomials joined by an exact output map.
pub fn polynomial(terms: &[(f64, MultiIndex)], k: usize, budget: SizeBudget) -> Result<Network> {
    let first = terms.first().ok_or(ForgeError::Empty("term list"))?;
    let d = first.1.dim();
    if let Some((_, bad)) = terms.iter().find(|(_, a)| a.dim() != d) {
        return Err(ForgeError::ShapeMismatch(format!(
            "multi-index {:?} does not have dimension {d}",
            bad.entries()
        )));
    }
    let nets: Vec<Network> = terms.iter().map(|(_, a)| monomial(a, k, budget)).collect::<Result<_>>()?;
    let p = parallel(&nets, true)?;
    let coeffs: Vec<(usize, f64)> = terms.iter().enumerate().map(|(i, (c, _))| (i, *c)).collect();
    postcompose(&p, &[(coeffs, 0.0)])
}
