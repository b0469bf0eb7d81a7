use serde::{Deserialize, Serialize};

use crate::error::{invalid, ForgeError, Result};
use crate::net_ir::{Activation, LayerBuilder, Network};

/// Points `(x, y)` with strictly increasing `x` and `y ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    points: Vec<(f64, f64)>,
}

impl SampleSet {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(invalid("samples", "need at least two points"));
        }
        for (i, &(x, y)) in points.iter().enumerate() {
            if !(x.is_finite() && y.is_finite()) {
                return Err(ForgeError::NonFinite(format!("samples[{i}]")));
            }
            if y < 0.0 {
                return Err(invalid("samples", format!("y[{i}] = {y} is negative")));
            }
            if i > 0 && x <= points[i - 1].0 {
                return Err(invalid("samples", format!("x[{i}] = {x} does not increase")));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Affine piece `v + a (x − x0)`.
#[derive(Clone, Copy)]
struct Piece {
    a: f64,
    v: f64,
    x0: f64,
}

impl Piece {
    fn at(self, x: f64) -> f64 {
        self.v + self.a * (x - self.x0)
    }
}

/// Two hidden layers of widths `(2N₁, 2N₂+1)` through `N₁(N₂+1)+1` samples.
///
/// Samples are cut into `N₁` blocks of `N₂+1`; the last sample stands alone.
/// Inside a block every second-layer unit is affine before its ReLU: one base
/// unit carries the first slope and pairs of units add the slope changes,
/// positive ones through `P` (weight +1), negative ones through `Q` (weight −1).
/// The first layer has breakpoints only in the gaps between blocks, where
/// it re-aims every unit at its next block.
pub fn fit_samples(samples: &SampleSet, n1: usize, n2: usize) -> Result<Network> {
    if n1 == 0 {
        return Err(invalid("N1", "must be at least 1"));
    }
    let n = n1 * (n2 + 1);
    if samples.len() != n + 1 {
        return Err(invalid(
            "samples",
            format!("N1={n1}, N2={n2} need {} samples, got {}", n + 1, samples.len()),
        ));
    }
    let pts = samples.points();
    let units = 2 * n2 + 1;
    let dead = |x0: f64| Piece { a: 0.0, v: -1.0, x0 };

    // pieces[j][r]: unit r on block j, before the base offset C0
    let mut pieces: Vec<Vec<Piece>> = Vec::with_capacity(n1);
    let mut c0 = 0.0f64;
    for j in 0..n1 {
        let z = &pts[j * (n2 + 1)..=j * (n2 + 1) + n2];
        let slopes: Vec<f64> = z.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
        let x0 = z[0].0;
        let mut row = Vec::with_capacity(units);
        let base = Piece {
            a: slopes.first().copied().unwrap_or(0.0),
            v: z[0].1,
            x0,
        };
        c0 = c0.max(-base.at(z[n2].0));
        row.push(base);
        for i in 1..n2 {
            let c = slopes[i] - slopes[i - 1];
            let active = Piece {
                a: c.abs(),
                v: c.abs() * (x0 - z[i].0),
                x0,
            };
            if c >= 0.0 {
                row.extend([active, dead(x0)]);
            } else {
                row.extend([dead(x0), active]);
            }
        }
        if n2 > 0 {
            row.extend([dead(x0), dead(x0)]);
        }
        pieces.push(row);
    }
    for row in &mut pieces {
        row[0].v += c0;
    }
    // value each unit takes at the lone last sample
    let (xn, yn) = pts[n];
    let mut last_target = vec![-1.0; units];
    last_target[0] = yn + c0;

    let mut first = LayerBuilder::new(1);
    first.row(&[(0, 1.0)], -pts[0].0);
    let mut gaps = Vec::with_capacity(n1 - 1);
    for j in 1..n1 {
        let e = pts[j * (n2 + 1) - 1].0;
        let b = pts[j * (n2 + 1)].0;
        let (p, q) = (e + (b - e) / 3.0, e + 2.0 * (b - e) / 3.0);
        let up = first.row(&[(0, 1.0)], -p);
        let uq = first.row(&[(0, 1.0)], -q);
        gaps.push((p, q, up, uq));
    }
    let pf = 0.5 * (pts[n - 1].0 + xn);
    let uf = first.row(&[(0, 1.0)], -pf);

    let mut second = LayerBuilder::new(first.len());
    for r in 0..units {
        let start = pieces[0][r];
        let mut terms = vec![(0, start.a)];
        for (j, &(p, q, up, uq)) in gaps.iter().enumerate() {
            let (prev, next) = (pieces[j][r], pieces[j + 1][r]);
            let mid = (next.at(q) - prev.at(p)) / (q - p);
            terms.push((up, mid - prev.a));
            terms.push((uq, next.a - mid));
        }
        let tail = pieces[n1 - 1][r];
        let sf = (last_target[r] - tail.at(pf)) / (xn - pf);
        terms.push((uf, sf - tail.a));
        second.row(&terms, start.at(pts[0].0));
    }

    let mut out_terms = vec![(0, 1.0)];
    for i in 1..=n2 {
        out_terms.push((2 * i - 1, 1.0));
        out_terms.push((2 * i, -1.0));
    }
    let mut output = LayerBuilder::new(units);
    output.row(&out_terms, -c0);
    Network::new(
        1,
        vec![
            first.build(Activation::Relu),
            second.build(Activation::Relu),
            output.build(Activation::Identity),
        ],
    )
}

/// Trade width for depth on a scalar-output network with two hidden layers
/// of widths `(n₁, n₂)`: the result has width ≤ `2n₁+2` and depth
/// `⌈n₂/n₁⌉ + 1`, and agrees with the input everywhere up to rounding.
///
/// The second layer is cut into blocks of `n₁` units computed one per layer,
/// beside a copy of the first layer's output and a running sum of finished
/// blocks kept as a positive and a negative part.
pub fn width_to_depth(net: &Network) -> Result<Network> {
    if net.depth() != 2 || net.output_dim() != 1 {
        return Err(ForgeError::ShapeMismatch(format!(
            "need two hidden layers and one output, got depth {} with {} outputs",
            net.depth(),
            net.output_dim()
        )));
    }
    let [l1, l2, l3] = net.layers() else { unreachable!() };
    let (n1, n2) = (l1.out_dim(), l2.out_dim());
    let blocks = n2.div_ceil(n1);
    if blocks <= 1 {
        return Ok(net.clone());
    }
    let v: Vec<f64> = (0..n2).map(|u| l3.weight(0, u)).collect();
    let block = |b: usize| (b - 1) * n1..(b * n1).min(n2);

    let mut layers = vec![l1.clone()];
    // offsets into the previous layer's output
    let mut prev_block: Option<(usize, std::ops::Range<usize>)> = None;
    let mut prev_acc: Option<usize> = None;
    for t in 2..=blocks + 1 {
        let in_dim = layers.last().expect("nonempty").out_dim();
        let mut lb = LayerBuilder::new(in_dim);
        if t <= blocks {
            for i in 0..n1 {
                lb.row(&[(i, 1.0)], 0.0);
            }
        }
        let here = lb.len();
        for u in block(t - 1) {
            lb.row(&l2.row(u).collect::<Vec<_>>(), l2.bias()[u]);
        }
        let mut acc_at = None;
        if let Some((off, range)) = prev_block.take() {
            let mut terms: Vec<(usize, f64)> = range.clone().map(|u| (off + u - range.start, v[u])).collect();
            if let Some(a) = prev_acc {
                terms.extend([(a, 1.0), (a + 1, -1.0)]);
            }
            let neg: Vec<(usize, f64)> = terms.iter().map(|&(c, w)| (c, -w)).collect();
            acc_at = Some(lb.row(&terms, 0.0));
            lb.row(&neg, 0.0);
        }
        prev_block = Some((here, block(t - 1)));
        prev_acc = acc_at;
        layers.push(lb.build(Activation::Relu));
    }
    let (off, range) = prev_block.expect("at least two blocks");
    let mut terms: Vec<(usize, f64)> = range.clone().map(|u| (off + u - range.start, v[u])).collect();
    if let Some(a) = prev_acc {
        terms.extend([(a, 1.0), (a + 1, -1.0)]);
    }
    let mut out = LayerBuilder::new(layers.last().expect("nonempty").out_dim());
    out.row(&terms, l3.bias()[0]);
    layers.push(out.build(Activation::Identity));
    Network::new(net.input_dim(), layers)
}
