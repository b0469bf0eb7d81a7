use crate::error::{ForgeError, Result};
use crate::net_ir::{compose, parallel, precompose, Activation, LayerBuilder, Network};

use super::trifling::TriflingRegion;

/// `mid(x₁, x₂, x₃)`, the middle of three reals, exactly; widthvec `[14, 10]`.
///
/// `mid = Σ − max − min`, where `max(max(x₁,x₂), x₃)` and `min(min(x₁,x₂), x₃)`
/// each take six units then four, and the sum rides along on two.
pub fn mid_network() -> Network {
    let mut l1 = LayerBuilder::new(3);
    // max part then min part: x₁+x₂ (±), x₁−x₂ (±), x₃ (±)
    for _ in 0..2 {
        l1.row(&[(0, 1.0), (1, 1.0)], 0.0);
        l1.row(&[(0, -1.0), (1, -1.0)], 0.0);
        l1.row(&[(0, 1.0), (1, -1.0)], 0.0);
        l1.row(&[(0, -1.0), (1, 1.0)], 0.0);
        l1.row(&[(2, 1.0)], 0.0);
        l1.row(&[(2, -1.0)], 0.0);
    }
    l1.row(&[(0, 1.0), (1, 1.0), (2, 1.0)], 0.0);
    l1.row(&[(0, -1.0), (1, -1.0), (2, -1.0)], 0.0);

    // inner max (sign +1) or min (sign −1) of x₁, x₂ as a combination of layer-1 units,
    // and x₃ itself
    let pair = |base: usize, sign: f64| -> Vec<(usize, f64)> {
        vec![(base, 0.5), (base + 1, -0.5), (base + 2, 0.5 * sign), (base + 3, 0.5 * sign)]
    };
    let x3 = |base: usize| -> Vec<(usize, f64)> { vec![(base + 4, 1.0), (base + 5, -1.0)] };
    let combine = |a: &[(usize, f64)], b: &[(usize, f64)], sa: f64, sb: f64| -> Vec<(usize, f64)> {
        a.iter().map(|&(c, w)| (c, sa * w)).chain(b.iter().map(|&(c, w)| (c, sb * w))).collect()
    };
    let mut l2 = LayerBuilder::new(14);
    for (base, sign) in [(0, 1.0), (6, -1.0)] {
        let (m, t) = (pair(base, sign), x3(base));
        l2.row(&combine(&m, &t, 1.0, 1.0), 0.0);
        l2.row(&combine(&m, &t, -1.0, -1.0), 0.0);
        l2.row(&combine(&m, &t, 1.0, -1.0), 0.0);
        l2.row(&combine(&m, &t, -1.0, 1.0), 0.0);
    }
    l2.row(&[(12, 1.0)], 0.0);
    l2.row(&[(13, 1.0)], 0.0);

    let mut out = LayerBuilder::new(10);
    out.row(
        &[
            (8, 1.0),
            (9, -1.0),
            (0, -0.5),
            (1, 0.5),
            (2, -0.5),
            (3, -0.5),
            (4, -0.5),
            (5, 0.5),
            (6, 0.5),
            (7, 0.5),
        ],
        0.0,
    );
    Network::new(
        3,
        vec![l1.build(Activation::Relu), l2.build(Activation::Relu), out.build(Activation::Identity)],
    )
    .expect("mid network layers chain")
}

/// Repair `net` on the trifling region: `φ_{i+1}(x) = mid(φ_i(x−δe_i), φ_i(x), φ_i(x+δe_i))`
/// for each axis in turn. Width grows to ≤ `3^d` times the input's, depth by `2d`.
pub fn remove_trifling(net: &Network, region: &TriflingRegion) -> Result<Network> {
    let d = region.dim();
    if net.input_dim() != d || net.output_dim() != 1 {
        return Err(ForgeError::DimensionMismatch {
            layer: 0,
            expected: d,
            found: net.input_dim(),
        });
    }
    let mid = mid_network();
    let mut cur = net.clone();
    for axis in 0..d {
        let copies: Vec<Network> = [-region.delta(), 0.0, region.delta()]
            .iter()
            .map(|&shift| {
                let rows: Vec<_> = (0..d)
                    .map(|j| (vec![(j, 1.0)], if j == axis { shift } else { 0.0 }))
                    .collect();
                precompose(&cur, d, &rows)
            })
            .collect::<Result<_>>()?;
        cur = compose(&mid, &parallel(&copies, true)?)?;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn true_mid(v: [f64; 3]) -> f64 {
        let mut s = v;
        s.sort_by(f64::total_cmp);
        s[1]
    }

    #[test]
    fn mid_values() {
        let m = mid_network();
        assert_eq!(m.widthvec(), vec![14, 10]);
        assert_eq!(m.evaluate(&[2.0, 1.0, 3.0]).unwrap(), vec![2.0]);
        assert_eq!(m.evaluate(&[3.0, 2.0, 3.0]).unwrap(), vec![3.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let a = rng.gen_range(-100.0..100.0);
            assert!((m.evaluate(&[a, a, a]).unwrap()[0] - a).abs() <= 1e-12);
        }
        for _ in 0..10_000 {
            let v = [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)];
            assert!((m.evaluate(&v).unwrap()[0] - true_mid(v)).abs() <= 1e-10);
        }
    }

    #[test]
    fn mid_ball_property() {
        let m = mid_network();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10_000 {
            let y = rng.gen_range(-5.0..5.0);
            let eps = rng.gen_range(0.0..2.0);
            let mut v = [
                y + rng.gen_range(-eps..=eps),
                y + rng.gen_range(-eps..=eps),
                rng.gen_range(-100.0..100.0),
            ];
            let k = rng.gen_range(0..3);
            v.swap(2, k);
            let got = m.evaluate(&v).unwrap()[0];
            assert!(got >= y - eps - 1e-12 && got <= y + eps + 1e-12);
        }
    }

    #[test]
    fn removal_sizes_and_shape_check() {
        let region = TriflingRegion::new(2, 4, 1.0 / 12.0).unwrap();
        let base = Network::linear(2, &[(vec![(0, 1.0), (1, 1.0)], 0.0)]);
        let out = remove_trifling(&base, &region).unwrap();
        assert_eq!(out.depth(), 4);
        for x in [[0.1, 0.2], [0.9, 0.4]] {
            assert!((out.evaluate(&x).unwrap()[0] - x[0] - x[1]).abs() <= 1e-12);
        }
        assert!(remove_trifling(&Network::identity(1), &region).is_err());
    }
}
