use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::GridSpec;
use crate::assembly::TargetFunction;
use crate::error::{ForgeError, Result};
use crate::net_ir::{EvalScratch, Network};

/// Largest observed `|φ(x) − f(x)|` and where it happened.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupError {
    pub measured: f64,
    pub argmax: Vec<f64>,
    pub samples: usize,
}

/// Larger error first; among equal errors the lexicographically smaller point.
fn better(a: &(f64, &[f64]), b: &(f64, &[f64])) -> bool {
    match a.0.total_cmp(&b.0) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a.1.iter().zip(b.1).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()) == Some(Ordering::Less),
    }
}

/// Sup error of `net` against `target` over explicit points. A NaN output counts as infinite error.
pub fn sup_error_at(net: &Network, target: &TargetFunction, points: &[Vec<f64>]) -> Result<SupError> {
    let d = net.input_dim();
    if target.dim() != d {
        return Err(ForgeError::DimensionMismatch {
            layer: 0,
            expected: d,
            found: target.dim(),
        });
    }
    if let Some(bad) = points.iter().find(|p| p.len() != d) {
        return Err(ForgeError::DimensionMismatch {
            layer: 0,
            expected: d,
            found: bad.len(),
        });
    }
    if points.is_empty() {
        return Err(ForgeError::Empty("sample set"));
    }
    let best = points
        .par_iter()
        .map_init(EvalScratch::default, |scratch, x| {
            let y = net.eval_with(x, scratch)[0];
            let e = (y - target.eval(x)).abs();
            (if e.is_nan() { f64::INFINITY } else { e }, x.as_slice())
        })
        .reduce_with(|a, b| if better(&b, &a) { b } else { a })
        .expect("nonempty");
    Ok(SupError {
        measured: best.0,
        argmax: best.1.to_vec(),
        samples: points.len(),
    })
}

pub fn sup_error(net: &Network, target: &TargetFunction, grid: &GridSpec) -> Result<SupError> {
    if grid.d != net.input_dim() {
        return Err(ForgeError::DimensionMismatch {
            layer: 0,
            expected: net.input_dim(),
            found: grid.d,
        });
    }
    sup_error_at(net, target, &grid.points())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::{square_approx, SizeBudget};

    #[test]
    fn exact_copy_measures_zero() {
        let net = Network::linear(2, &[(vec![], 0.7)]);
        let f = TargetFunction::new("c", 2, 1, 0.7, |_: &[f64]| 0.7).unwrap();
        let r = sup_error(&net, &f, &GridSpec::new(2, 30, 0).unwrap()).unwrap();
        assert!(r.measured <= 1e-12);
        assert_eq!(r.samples, 900 + 841);
        // every point ties at zero, so the smallest one wins
        assert_eq!(r.argmax, vec![0.0, 0.0]);
    }

    #[test]
    fn square_peak() {
        let net = square_approx(SizeBudget::new(2, 1).unwrap()).unwrap();
        let f = TargetFunction::new("x^2", 1, 1, 2.0, |x: &[f64]| x[0] * x[0]).unwrap();
        let r = sup_error(&net, &f, &GridSpec::new(1, 100_001, 0).unwrap()).unwrap();
        assert!(r.measured <= 1.0 / 16.0 && r.measured >= 1.0 / 16.0 - 1e-9, "{}", r.measured);
        assert!(r.argmax[0] == 0.25 || r.argmax[0] == 0.75);
    }

    #[test]
    fn nan_is_infinite_and_dims_checked() {
        let net = Network::linear(1, &[(vec![(0, f64::NAN)], 0.0)]);
        let f = TargetFunction::new("z", 1, 1, 0.0, |_: &[f64]| 0.0).unwrap();
        let r = sup_error_at(&net, &f, &[vec![0.5]]).unwrap();
        assert_eq!(r.measured, f64::INFINITY);
        let g = TargetFunction::new("z", 2, 1, 0.0, |_: &[f64]| 0.0).unwrap();
        assert!(sup_error_at(&net, &g, &[vec![0.5]]).is_err());
        assert!(sup_error_at(&net, &f, &[vec![0.5, 0.1]]).is_err());
        assert!(sup_error_at(&net, &f, &[]).is_err());
        assert!(sup_error(&net, &f, &GridSpec::new(2, 3, 0).unwrap()).is_err());
    }

    #[test]
    fn deterministic_ties() {
        let net = Network::linear(1, &[(vec![], 1.0)]);
        let f = TargetFunction::new("z", 1, 1, 0.0, |_: &[f64]| 0.0).unwrap();
        let pts: Vec<Vec<f64>> = (0..1000).rev().map(|i| vec![i as f64]).collect();
        let r = sup_error_at(&net, &f, &pts).unwrap();
        assert_eq!(r.argmax, vec![0.0]);
    }
}
