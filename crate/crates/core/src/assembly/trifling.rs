use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// `Ω([0,1]^d, K, δ)`: points with some coordinate in `(k/K − δ, k/K)` for `k = 1..K−1`.
/// Empty when `K = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriflingRegion {
    d: usize,
    k: usize,
    delta: f64,
}

impl TriflingRegion {
    pub fn new(d: usize, k: usize, delta: f64) -> Result<Self> {
        if d == 0 {
            return Err(invalid("d", "must be at least 1"));
        }
        if k == 0 {
            return Err(invalid("K", "must be at least 1"));
        }
        if !(delta > 0.0 && delta <= 1.0 / (3.0 * k as f64)) {
            return Err(invalid("delta", format!("need 0 < δ ≤ 1/(3K), got {delta} for K = {k}")));
        }
        Ok(Self { d, k, delta })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn cells(&self) -> usize {
        self.k
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Whether the single coordinate `t` falls in one of the open slabs.
    pub fn coordinate_in_slab(&self, t: f64) -> bool {
        let kf = self.k as f64;
        let m = (t * kf).ceil();
        m >= 1.0 && m <= kf - 1.0 && t > m / kf - self.delta && t < m / kf
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().any(|&t| self.coordinate_in_slab(t))
    }

    /// The cell `Q_β` holding `x`; coordinates are clamped into `0..K`.
    pub fn cell_of(&self, x: &[f64]) -> CellIndex {
        let kf = self.k as f64;
        CellIndex {
            beta: x
                .iter()
                .map(|&t| ((t * kf).floor().max(0.0) as usize).min(self.k - 1))
                .collect(),
        }
    }
}

/// `β ∈ {0..K−1}^d`, naming the cell `Q_β` with anchor `β/K`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellIndex {
    pub beta: Vec<usize>,
}

impl CellIndex {
    /// The vertex `β/K` of smallest 1-norm.
    pub fn anchor(&self, k: usize) -> Vec<f64> {
        self.beta.iter().map(|&b| b as f64 / k as f64).collect()
    }

    /// `i = Σ_j β_j K^j`.
    pub fn flatten(&self, k: usize) -> usize {
        self.beta.iter().rev().fold(0, |acc, &b| acc * k + b)
    }

    /// `η(i)`, the inverse of [`Self::flatten`].
    pub fn unflatten(mut i: usize, d: usize, k: usize) -> Self {
        let mut beta = Vec::with_capacity(d);
        for _ in 0..d {
            beta.push(i % k);
            i /= k;
        }
        Self { beta }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    #[test]
    fn membership() {
        let r = TriflingRegion::new(1, 4, 0.05).unwrap();
        assert!(r.contains(&[0.24]));
        assert!(!r.contains(&[0.25]));
        assert!(!r.contains(&[0.2]));
        assert!(r.contains(&[0.72]));
        assert!(!r.contains(&[0.7]));
        assert!(!r.contains(&[0.99]));
        assert!(!r.contains(&[0.0]));
        let r2 = TriflingRegion::new(2, 4, 0.05).unwrap();
        assert!(r2.contains(&[0.1, 0.49]));
        assert!(!r2.contains(&[0.1, 0.5]));
    }

    #[test]
    fn single_cell_is_empty() {
        let r = TriflingRegion::new(3, 1, 1.0 / 3.0).unwrap();
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            assert!(!r.contains(&[t, t, t]));
        }
    }

    #[test]
    fn validation() {
        assert!(TriflingRegion::new(1, 4, 0.1).is_err());
        assert!(TriflingRegion::new(1, 4, 0.0).is_err());
        assert!(TriflingRegion::new(0, 4, 0.01).is_err());
        assert!(TriflingRegion::new(1, 0, 0.01).is_err());
    }

    #[test]
    fn cells_and_anchors() {
        let r = TriflingRegion::new(2, 4, 0.05).unwrap();
        let c = r.cell_of(&[0.3, 1.0]);
        assert_eq!(c.beta, vec![1, 3]);
        assert_eq!(c.anchor(4), vec![0.25, 0.75]);
        assert_eq!(r.cell_of(&[-0.1, 0.0]).beta, vec![0, 0]);
    }

    #[test]
    fn flattening_is_a_bijection() {
        for d in 1..=3 {
            for k in 1..=4usize {
                let total = k.pow(d as u32);
                let mut seen = HashSet::new();
                for i in 0..total {
                    let c = CellIndex::unflatten(i, d, k);
                    assert!(c.beta.iter().all(|&b| b < k));
                    assert_eq!(c.flatten(k), i);
                    seen.insert(c);
                }
                assert_eq!(seen.len(), total);
            }
        }
        assert_eq!(CellIndex { beta: vec![1, 2] }.flatten(4), 9);
    }
}
