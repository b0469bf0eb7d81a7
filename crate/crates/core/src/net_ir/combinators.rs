use super::layer::{Activation, AffineLayer, LayerBuilder};
use super::network::Network;
use crate::error::{ForgeError, Result};

/// `outer ∘ inner`, merging inner's output map into outer's first layer.
pub fn compose(outer: &Network, inner: &Network) -> Result<Network> {
    if inner.output_dim() != outer.input_dim() {
        return Err(ForgeError::DimensionMismatch {
            layer: 0,
            expected: outer.input_dim(),
            found: inner.output_dim(),
        });
    }
    let inner_layers = inner.layers();
    let (inner_out, inner_hidden) = inner_layers.split_last().expect("networks are never empty");
    let mut layers: Vec<AffineLayer> = inner_hidden.to_vec();
    layers.push(outer.layers()[0].after(inner_out));
    layers.extend_from_slice(&outer.layers()[1..]);
    Network::new(inner.input_dim(), layers)
}

/// Extend `net` to `target_depth` by carrying its outputs through extra ReLU layers.
///
/// Outputs flagged in `nonneg` travel on one channel as `σ(y)`; the rest use
/// `σ(y) − σ(−y)`. A nonneg flag is a promise about the inputs the caller
/// cares about; elsewhere the carried value is clipped at zero.
pub fn pad_depth(net: &Network, target_depth: usize, nonneg: &[bool]) -> Result<Network> {
    if nonneg.len() != net.output_dim() {
        return Err(ForgeError::ShapeMismatch(format!(
            "{} nonneg flags for {} outputs",
            nonneg.len(),
            net.output_dim()
        )));
    }
    let depth = net.depth();
    if target_depth < depth {
        return Err(ForgeError::ShapeMismatch(format!(
            "cannot pad depth {depth} down to {target_depth}"
        )));
    }
    if target_depth == depth {
        return Ok(net.clone());
    }
    let mut layers = net.clone().into_layers();
    let out = layers.pop().expect("networks are never empty");

    // split each output into one or two nonnegative channels
    let mut split = LayerBuilder::new(out.out_dim());
    // (positive channel, optional negative channel) per output
    let mut channels = Vec::with_capacity(out.out_dim());
    for (o, &nn) in nonneg.iter().enumerate() {
        let p = split.row(&[(o, 1.0)], 0.0);
        let n = (!nn).then(|| split.row(&[(o, -1.0)], 0.0));
        channels.push((p, n));
    }
    let width = split.len();
    let split = split.build(Activation::Relu);
    layers.push(split.after(&out));
    for _ in 1..(target_depth - depth) {
        layers.push(AffineLayer::identity(width, Activation::Relu));
    }
    let mut merge = LayerBuilder::new(width);
    for (p, n) in channels {
        match n {
            Some(n) => merge.row(&[(p, 1.0), (n, -1.0)], 0.0),
            None => merge.row(&[(p, 1.0)], 0.0),
        };
    }
    layers.push(merge.build(Activation::Identity));
    Network::new(net.input_dim(), layers)
}

/// Side-by-side networks; outputs are concatenated in order.
///
/// With `shared_input` every branch reads the same input vector, otherwise the
/// input is the concatenation of the branch inputs. Shallower branches are
/// padded with signed passthrough channels; pad them yourself with
/// [`pad_depth`] when a cheaper one-channel carry is valid.
pub fn parallel(nets: &[Network], shared_input: bool) -> Result<Network> {
    let first = nets.first().ok_or(ForgeError::Empty("network list"))?;
    if shared_input {
        if let Some(bad) = nets.iter().find(|n| n.input_dim() != first.input_dim()) {
            return Err(ForgeError::DimensionMismatch {
                layer: 0,
                expected: first.input_dim(),
                found: bad.input_dim(),
            });
        }
    }
    let depth = nets.iter().map(Network::depth).max().unwrap_or(0);
    let padded: Vec<Network> = nets
        .iter()
        .map(|n| {
            if n.depth() == depth {
                Ok(n.clone())
            } else {
                pad_depth(n, depth, &vec![false; n.output_dim()])
            }
        })
        .collect::<Result<_>>()?;

    let input_dim = if shared_input {
        first.input_dim()
    } else {
        padded.iter().map(Network::input_dim).sum()
    };
    let mut layers = Vec::with_capacity(depth + 1);
    for t in 0..=depth {
        let activation = padded[0].layers()[t].activation();
        if padded.iter().any(|n| n.layers()[t].activation() != activation) {
            return Err(ForgeError::ShapeMismatch(format!("branches disagree on activation at layer {t}")));
        }
        let mut parts = Vec::with_capacity(padded.len());
        let mut offset = 0;
        for n in &padded {
            let l = &n.layers()[t];
            let shift = if t == 0 && shared_input { 0 } else { offset };
            parts.push((l, shift));
            offset += l.in_dim();
        }
        let in_dim = if t == 0 { input_dim } else { offset };
        layers.push(AffineLayer::stack(&parts, in_dim, activation));
    }
    Network::new(input_dim, layers)
}

/// Merge every interior identity-activation layer into the layer after it.
pub fn collapse_identity_layers(net: &Network) -> Network {
    let mut out: Vec<AffineLayer> = Vec::with_capacity(net.layers().len());
    let mut pending: Option<AffineLayer> = None;
    for l in net.layers() {
        let l = match pending.take() {
            Some(p) => l.after(&p),
            None => l.clone(),
        };
        if l.activation() == Activation::Identity {
            pending = Some(l);
        } else {
            out.push(l);
        }
    }
    out.push(pending.expect("final layer is identity"));
    Network::new(net.input_dim(), out).expect("collapse preserves chaining")
}

/// `net(A x + c)` for the affine map given by `rows`.
pub fn precompose(net: &Network, input_dim: usize, rows: &[(Vec<(usize, f64)>, f64)]) -> Result<Network> {
    compose(net, &Network::linear(input_dim, rows))
}

/// `A net(x) + c` for the affine map given by `rows`.
pub fn postcompose(net: &Network, rows: &[(Vec<(usize, f64)>, f64)]) -> Result<Network> {
    compose(&Network::linear(net.output_dim(), rows), net)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tent() -> Network {
        // T1 = σ(2x) − σ(4x − 2)
        let l0 = AffineLayer::from_dense(&[vec![2.0], vec![4.0]], vec![0.0, -2.0], Activation::Relu).unwrap();
        let l1 = AffineLayer::from_dense(&[vec![1.0, -1.0]], vec![0.0], Activation::Identity).unwrap();
        Network::new(1, vec![l0, l1]).unwrap()
    }

    #[test]
    fn compose_tents() {
        let t2 = compose(&tent(), &tent()).unwrap();
        assert_eq!(t2.depth(), 2);
        assert_eq!(t2.eval1(0.25), 1.0);
        assert_eq!(t2.eval1(0.75), 1.0);
        assert_eq!(t2.eval1(0.5), 0.0);
    }

    #[test]
    fn compose_rejects_mismatch() {
        assert!(compose(&Network::identity(2), &tent()).is_err());
    }

    #[test]
    fn parallel_unshared_identities() {
        let p = parallel(&[Network::identity(1), Network::identity(1)], false).unwrap();
        assert_eq!(p.evaluate(&[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn parallel_pads_shallow_branch() {
        let neg = Network::linear(1, &[(vec![(0, -1.0)], 0.0)]);
        let p = parallel(&[tent(), neg], true).unwrap();
        assert_eq!(p.depth(), 1);
        // tent has width 2, the padded branch needs 2 channels for a signed value
        assert_eq!(p.width(), 4);
        assert_eq!(p.evaluate(&[0.25]).unwrap(), vec![0.5, -0.25]);
    }

    #[test]
    fn parallel_errors() {
        assert!(parallel(&[], true).is_err());
        assert!(parallel(&[Network::identity(1), Network::identity(2)], true).is_err());
    }

    #[test]
    fn pad_depth_nonneg_uses_one_channel() {
        let n = Network::linear(2, &[(vec![(0, 1.0), (1, 1.0)], 0.0)]);
        let p = pad_depth(&n, 3, &[true]).unwrap();
        assert_eq!(p.size_report().depth, 3);
        assert_eq!(p.width(), 1);
        assert_eq!(p.evaluate(&[0.25, 0.5]).unwrap(), vec![0.75]);
        let s = pad_depth(&n, 2, &[false]).unwrap();
        assert_eq!(s.width(), 2);
        assert_eq!(s.evaluate(&[-0.25, -0.5]).unwrap(), vec![-0.75]);
    }

    #[test]
    fn collapse_merges_interior_identity() {
        let l0 = AffineLayer::from_dense(&[vec![2.0]], vec![1.0], Activation::Identity).unwrap();
        let l1 = AffineLayer::from_dense(&[vec![1.0], vec![-1.0]], vec![0.0, 0.0], Activation::Relu).unwrap();
        let l2 = AffineLayer::from_dense(&[vec![1.0, 1.0]], vec![0.0], Activation::Identity).unwrap();
        let n = Network::new(1, vec![l0, l1, l2]).unwrap();
        let c = collapse_identity_layers(&n);
        assert_eq!(c.depth(), 1);
        assert!(c.is_finalized());
        for x in [-3.0, -0.5, 0.0, 0.7, 2.0] {
            assert_eq!(c.eval1(x), n.eval1(x));
        }
        // no interior identity: unchanged
        assert_eq!(collapse_identity_layers(&tent()), tent());
    }
}
