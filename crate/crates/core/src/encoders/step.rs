use crate::error::{invalid, Result};
use crate::net_ir::{compose, pad_depth, parallel, postcompose, precompose, Network};
use crate::primitives::SizeBudget;

use super::fit::{fit_samples, width_to_depth, SampleSet};

/// `⌊n^{1/k}⌋` in integers.
pub fn int_root(n: usize, k: u32) -> usize {
    if k == 1 {
        return n;
    }
    let mut r = (n as f64).powf(1.0 / f64::from(k)).round() as usize;
    while r > 0 && r.checked_pow(k).map_or(true, |p| p > n) {
        r -= 1;
    }
    while (r + 1).checked_pow(k).is_some_and(|p| p <= n) {
        r += 1;
    }
    r
}

/// Cells per axis `K = ⌊N^{1/d}⌋² ⌊L^{2/d}⌋`.
pub fn cells_per_axis(d: usize, budget: SizeBudget) -> usize {
    let n1 = int_root(budget.n, d as u32);
    let l2 = int_root(budget.l * budget.l, d as u32);
    n1 * n1 * l2
}

/// Samples `(k/K, k)` and `((k+1)/K − δ, k)` for `k ≤ K−2`, then `(1, K−1)` and `(2, 0)`.
fn staircase(cells: usize, width: f64, delta: f64) -> Result<SampleSet> {
    let mut pts = Vec::with_capacity(2 * cells + 1);
    for k in 0..cells {
        let v = k as f64;
        pts.push((k as f64 * width, v));
        let right = if k + 1 == cells {
            cells as f64 * width
        } else {
            (k + 1) as f64 * width - delta
        };
        pts.push((right, v));
    }
    pts.push((2.0, 0.0));
    SampleSet::new(pts)
}

fn fit_narrow(samples: &SampleSet, n1: usize, n2: usize) -> Result<Network> {
    width_to_depth(&fit_samples(samples, n1, n2)?)
}

/// `φ(x) = k` on `[k/K, (k+1)/K − δ]` (no gap after the last cell), with
/// width ≤ `4⌊N^{1/d}⌋+3` and depth ≤ `4L+5`.
///
/// For `d = 1` the index is split as `k = mL + ℓ` with `M = N²L` coarse cells:
/// one fit finds `m`, a second finds `ℓ` from `x − m/M`. For `d ≥ 2` a single
/// fit suffices. Behaviour outside `[0,1]` is unspecified.
pub fn step_function(d: usize, budget: SizeBudget, delta: f64) -> Result<Network> {
    if d == 0 {
        return Err(invalid("d", "must be at least 1"));
    }
    let cells = cells_per_axis(d, budget);
    if cells == 0 {
        return Err(invalid("K", "no cells"));
    }
    if !(delta > 0.0 && delta <= 1.0 / (3.0 * cells as f64)) {
        return Err(invalid("delta", format!("need 0 < δ ≤ 1/(3K) = {}, got {delta}", 1.0 / (3.0 * cells as f64))));
    }
    let kf = cells as f64;
    if d >= 2 {
        let n1 = int_root(budget.n, d as u32);
        let l2 = int_root(budget.l * budget.l, d as u32);
        return fit_narrow(&staircase(cells, 1.0 / kf, delta)?, n1, 2 * n1 * l2 - 1);
    }
    let (n, l) = (budget.n, budget.l);
    let m = n * n * l;
    let coarse = fit_narrow(&staircase(m, 1.0 / m as f64, delta)?, n, 2 * n * l - 1)?;
    let fine = fit_narrow(&staircase(l, 1.0 / kf, delta)?, 1, 2 * l - 1)?;

    let carry_x = pad_depth(&Network::identity(1), coarse.depth(), &[true])?;
    let stage_a = parallel(&[coarse, carry_x], true)?;
    // (m, x) ↦ (ℓ, m)
    let offset = precompose(&fine, 2, &[(vec![(1, 1.0), (0, -1.0 / m as f64)], 0.0)])?;
    let carry_m = pad_depth(&Network::projection(2, &[0]), offset.depth(), &[true])?;
    let stage_b = postcompose(&parallel(&[offset, carry_m], true)?, &[(vec![(0, 1.0), (1, l as f64)], 0.0)])?;
    compose(&stage_b, &stage_a)
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn budget(n: usize, l: usize) -> SizeBudget {
        SizeBudget::new(n, l).unwrap()
    }

    #[test]
    fn int_roots() {
        assert_eq!(int_root(8, 3), 2);
        assert_eq!(int_root(7, 3), 1);
        assert_eq!(int_root(27, 3), 3);
        assert_eq!(int_root(1_000_000, 2), 1000);
        assert_eq!(int_root(999_999, 2), 999);
        assert_eq!(int_root(5, 1), 5);
        assert_eq!(int_root(0, 2), 0);
    }

    #[test]
    fn cell_counts() {
        assert_eq!(cells_per_axis(1, budget(2, 1)), 4);
        assert_eq!(cells_per_axis(1, budget(2, 3)), 36);
        assert_eq!(cells_per_axis(2, budget(4, 2)), 8);
        assert_eq!(cells_per_axis(3, budget(1, 1)), 1);
    }

    #[test]
    fn small_one_dimensional_values() {
        let net = step_function(1, budget(2, 1), 1.0 / 12.0).unwrap();
        assert_eq!(net.eval1(0.0), 0.0);
        assert!((net.eval1(0.5) - 2.0).abs() <= 1e-12);
        assert!((net.eval1(1.0) - 3.0).abs() <= 1e-12);
    }

    fn check_plateaus(d: usize, n: usize, l: usize, delta_frac: f64, seed: u64) {
        let b = budget(n, l);
        let cells = cells_per_axis(d, b);
        let delta = delta_frac / (3.0 * cells as f64);
        let net = step_function(d, b, delta).unwrap();
        let n_root = int_root(n, d as u32);
        assert!(net.width() <= 4 * n_root + 3, "width {}", net.width());
        assert!(net.depth() <= 4 * l + 5, "depth {}", net.depth());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kf = cells as f64;
        // ramps in the gaps have slopes ~ 1/δ², so rounding grows like ε/δ²
        let tol = 1e-9f64.max(1e-15 / (delta * delta));
        for k in 0..cells {
            let lo = k as f64 / kf;
            let hi = if k + 1 == cells { 1.0 } else { (k + 1) as f64 / kf - delta };
            let mut xs = vec![lo, hi];
            xs.extend((0..10).map(|_| rng.gen_range(lo..=hi)));
            for x in xs {
                let v = net.eval1(x);
                assert!((v - k as f64).abs() <= tol, "d={d} N={n} L={l} k={k} x={x} φ={v}");
            }
        }
    }

    #[test]
    fn plateaus_one_dimensional() {
        for n in 1..=3 {
            for l in 1..=3 {
                check_plateaus(1, n, l, 1.0, 5);
                check_plateaus(1, n, l, 0.1, 6);
            }
        }
    }

    #[test]
    fn plateaus_higher_dimensional() {
        for (d, n, l) in [(2, 4, 2), (2, 9, 3), (3, 8, 2), (2, 1, 1), (3, 27, 4)] {
            check_plateaus(d, n, l, 1.0, 7);
        }
    }

    #[test]
    fn single_cell_is_zero() {
        let net = step_function(2, budget(1, 1), 1.0 / 3.0).unwrap();
        for i in 0..=100 {
            assert_eq!(net.eval1(i as f64 / 100.0), 0.0);
        }
    }

    #[test]
    fn rejects_bad_delta() {
        assert!(step_function(1, budget(2, 1), 0.0).is_err());
        assert!(step_function(1, budget(2, 1), 0.1).is_err());
        assert!(step_function(0, budget(2, 1), 0.01).is_err());
    }
}
