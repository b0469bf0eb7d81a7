use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// `α ∈ ℕ^d`, indexing monomials `x^α` and derivatives `∂^α`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("alpha", "needs at least one entry"));
        }
        Ok(Self(entries))
    }

    pub fn zero(d: usize) -> Self {
        Self(vec![0; d.max(1)])
    }

    pub fn unit(d: usize, j: usize) -> Self {
        let mut e = vec![0; d];
        e[j] = 1;
        Self(e)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `‖α‖₁`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `α! = Π α_j!`.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&a| (1..=a).map(f64::from).product::<f64>()).product()
    }

    /// `x^α`.
    pub fn pow(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(&a, &v)| v.powi(a as i32)).product()
    }

    /// All `α ∈ ℕ^d` with `‖α‖₁ ≤ max_order`, in lexicographic order.
    pub fn all_up_to(d: usize, max_order: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; d];
        fn rec(j: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if j == cur.len() {
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for a in 0..=left {
                cur[j] = a;
                rec(j + 1, left - a, cur, out);
            }
            cur[j] = 0;
        }
        rec(0, max_order, &mut cur, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_and_factorial() {
        let a = MultiIndex::new(vec![2, 0, 3]).unwrap();
        assert_eq!(a.order(), 5);
        assert_eq!(a.factorial(), 12.0);
        assert_eq!(a.pow(&[0.5, 9.0, 2.0]), 2.0);
        assert!(MultiIndex::new(vec![]).is_err());
    }

    #[test]
    fn enumeration_is_lexicographic_and_complete() {
        let all = MultiIndex::all_up_to(2, 2);
        let got: Vec<Vec<u32>> = all.iter().map(|a| a.entries().to_vec()).collect();
        assert_eq!(got, vec![vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 0], vec![1, 1], vec![2, 0]]);
        // C(m+d, d) indices of order ≤ m
        assert_eq!(MultiIndex::all_up_to(3, 3).len(), 20);
        assert_eq!(MultiIndex::all_up_to(1, 0).len(), 1);
    }
}
