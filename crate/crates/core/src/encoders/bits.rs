use serde::{Deserialize, Serialize};

use crate::error::{invalid, ForgeError, Result};
use crate::net_ir::{compose, pad_depth, parallel, postcompose, Activation, LayerBuilder, Network};
use crate::primitives::SizeBudget;

use super::fit::{fit_samples, width_to_depth, SampleSet};

/// Matrix of bits `θ_{m,ℓ}`. A flat table `θ_i` is a single column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitTable {
    rows: usize,
    cols: usize,
    bits: Vec<u8>,
}

impl BitTable {
    pub fn from_rows(rows: Vec<Vec<u8>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || cols == 0 {
            return Err(ForgeError::Empty("bit table"));
        }
        if let Some(r) = rows.iter().position(|r| r.len() != cols) {
            return Err(ForgeError::ShapeMismatch(format!("bit row {r} has {} entries, expected {cols}", rows[r].len())));
        }
        let n = rows.len();
        Self::check(Self {
            rows: n,
            cols,
            bits: rows.into_iter().flatten().collect(),
        })
    }

    pub fn flat(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(ForgeError::Empty("bit table"));
        }
        Self::check(Self {
            rows: bits.len(),
            cols: 1,
            bits,
        })
    }

    fn check(t: Self) -> Result<Self> {
        if let Some(i) = t.bits.iter().position(|&b| b > 1) {
            return Err(invalid("bits", format!("entry {i} is {}, not 0 or 1", t.bits[i])));
        }
        Ok(t)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, m: usize, l: usize) -> u8 {
        self.bits[m * self.cols + l]
    }

    /// Row-major entries; for a flat table these are `θ_0, θ_1, …`.
    pub fn as_flat(&self) -> &[u8] {
        &self.bits
    }
}

/// `φ(m, ℓ) = Σ_{j≤ℓ} θ_{m,j}` for integers `0 ≤ m < N²L`, `0 ≤ ℓ < L`;
/// width ≤ `4N+3`, depth ≤ `3L+3`.
///
/// Row `m` is first mapped to the dyadic `ξ = Σ_j θ_{m,j} 2^{−(j+1)}` by a fit.
/// Then `L` rounds of two layers peel off the leading bit with a ramp
/// comparator that is exact on multiples of the current grid `2^{−(L−j)}`,
/// and add it to the sum when `j ≤ ℓ`.
pub fn bit_extract_cumsum(bits: &BitTable, budget: SizeBudget) -> Result<Network> {
    let (n, l) = (budget.n, budget.l);
    let m = n * n * l;
    if bits.rows() != m || bits.cols() != l {
        return Err(ForgeError::ShapeMismatch(format!(
            "cumulative extractor with N={n}, L={l} needs a {m}×{l} table, got {}×{}",
            bits.rows(),
            bits.cols()
        )));
    }
    let mut pts: Vec<(f64, f64)> = (0..m)
        .map(|r| {
            let y = (0..l).map(|j| f64::from(bits.get(r, j)) * 0.5f64.powi(j as i32 + 1)).sum();
            (r as f64, y)
        })
        .collect();
    pts.push((m as f64, 0.0));
    let encode = width_to_depth(&fit_samples(&SampleSet::new(pts)?, n, n * l - 1)?)?;
    let carry_l = pad_depth(&Network::projection(2, &[1]), encode.depth(), &[true])?;
    let encode = compose(&encode, &Network::projection(2, &[0]))?;
    let stage1 = parallel(&[encode, carry_l], true)?;

    // columns after B_j: ξ, ℓ, acc, p; inside A_j also θa, θb, ia, ib
    let mut layers = Vec::with_capacity(2 * l + 1);
    for j in 0..l {
        let in_dim = if j == 0 { 2 } else { 4 };
        let g = 0.5f64.powi((l - j) as i32);
        let (lo, hi, w) = (0.5 - 0.75 * g, 0.5 - 0.25 * g, 0.5 * g);
        let jf = j as f64;
        let mut a = LayerBuilder::new(in_dim);
        a.row(&[(0, 1.0)], 0.0);
        a.row(&[(1, 1.0)], 0.0);
        if j == 0 {
            a.row(&[], 0.0);
        } else {
            a.row(&[(2, 1.0), (3, 1.0)], 0.0);
        }
        a.row(&[(0, 1.0 / w)], -lo / w);
        a.row(&[(0, 1.0 / w)], -hi / w);
        a.row(&[(1, 1.0)], 1.0 - jf);
        a.row(&[(1, 1.0)], -jf);
        layers.push(a.build(Activation::Relu));

        let mut b = LayerBuilder::new(7);
        b.row(&[(0, 2.0), (3, -1.0), (4, 1.0)], 0.0);
        b.row(&[(1, 1.0)], 0.0);
        b.row(&[(2, 1.0)], 0.0);
        b.row(&[(3, 1.0), (4, -1.0), (5, 1.0), (6, -1.0)], -1.0);
        layers.push(b.build(Activation::Relu));
    }
    let mut out = LayerBuilder::new(4);
    out.row(&[(2, 1.0), (3, 1.0)], 0.0);
    layers.push(out.build(Activation::Identity));
    compose(&Network::new(2, layers)?, &stage1)
}

/// `φ(i) = θ_i` for integers `0 ≤ i < N²L²`; width ≤ `8N+6`, depth ≤ `5L+7`.
///
/// `ψ(i) = ⌊i/L⌋` comes from a fit; then with `ℓ = i − Lψ(i)` two cumulative
/// extractors give `θ_i` as the difference of the sums up to `ℓ` and up to `ℓ−1`.
/// For `L = 1` the bits are fitted directly.
pub fn bit_extract_single(bits: &BitTable, budget: SizeBudget) -> Result<Network> {
    let (n, l) = (budget.n, budget.l);
    let total = n * n * l * l;
    if bits.cols() != 1 || bits.rows() != total {
        return Err(ForgeError::ShapeMismatch(format!(
            "single extractor with N={n}, L={l} needs {total} flat bits, got {}×{}",
            bits.rows(),
            bits.cols()
        )));
    }
    let theta = bits.as_flat();
    if l == 1 {
        let mut pts: Vec<(f64, f64)> = theta.iter().enumerate().map(|(i, &b)| (i as f64, f64::from(b))).collect();
        pts.push((total as f64, 0.0));
        return fit_samples(&SampleSet::new(pts)?, n, n - 1);
    }
    let m = n * n * l;
    let mut pts = Vec::with_capacity(2 * m + 1);
    for r in 0..m {
        pts.push(((r * l) as f64, r as f64));
        pts.push((((r + 1) * l - 1) as f64, r as f64));
    }
    pts.push(((m * l) as f64, m as f64));
    let psi = width_to_depth(&fit_samples(&SampleSet::new(pts)?, n, 2 * n * l - 1)?)?;
    let carry_i = pad_depth(&Network::identity(1), psi.depth(), &[true])?;
    let stage_a = postcompose(
        &parallel(&[psi, carry_i], true)?,
        &[(vec![(0, 1.0)], 0.0), (vec![(1, 1.0), (0, -(l as f64))], 0.0)],
    )?;

    let row = |r: usize| &theta[r * l..(r + 1) * l];
    let a = BitTable::from_rows((0..m).map(|r| row(r).to_vec()).collect())?;
    let b = BitTable::from_rows(
        (0..m)
            .map(|r| std::iter::once(0).chain(row(r)[..l - 1].iter().copied()).collect())
            .collect(),
    )?;
    let sums = parallel(&[bit_extract_cumsum(&a, budget)?, bit_extract_cumsum(&b, budget)?], true)?;
    let diff = postcompose(&sums, &[(vec![(0, 1.0), (1, -1.0)], 0.0)])?;
    compose(&diff, &stage_a)
}
