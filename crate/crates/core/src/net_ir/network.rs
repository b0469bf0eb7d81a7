use serde::{Deserialize, Serialize};

use super::layer::{Activation, AffineLayer, LayerBuilder};
use crate::error::{invalid, ForgeError, Result};

/// Width, depth and parameter count of a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeReport {
    /// Largest hidden layer; 0 for a purely affine network.
    pub width: usize,
    /// Number of hidden layers. The output layer does not count.
    pub depth: usize,
    /// Weight plus bias entries, counted densely.
    pub params: usize,
}

/// Feed-forward network: a chain of affine layers, the last one with identity activation.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    input_dim: usize,
    layers: Vec<AffineLayer>,
}

/// Reusable buffers for repeated evaluation.
#[derive(Debug, Default, Clone)]
pub struct EvalScratch {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Network {
    pub fn new(input_dim: usize, layers: Vec<AffineLayer>) -> Result<Self> {
        if input_dim == 0 {
            return Err(invalid("input_dim", "must be positive"));
        }
        let Some(last) = layers.last() else {
            return Err(ForgeError::Empty("layer list"));
        };
        if last.activation() != Activation::Identity {
            return Err(ForgeError::ShapeMismatch("final layer must use identity activation".into()));
        }
        let mut expected = input_dim;
        for (i, l) in layers.iter().enumerate() {
            if l.in_dim() != expected {
                return Err(ForgeError::DimensionMismatch {
                    layer: i,
                    expected,
                    found: l.in_dim(),
                });
            }
            expected = l.out_dim();
        }
        Ok(Self { input_dim, layers })
    }

    /// Depth-zero network computing a single affine map.
    pub fn affine(layer: AffineLayer) -> Self {
        let input_dim = layer.in_dim();
        Self {
            input_dim,
            layers: vec![layer.with_activation(Activation::Identity)],
        }
    }

    /// Depth-zero network from sparse rows `(terms, bias)`.
    pub fn linear(input_dim: usize, rows: &[(Vec<(usize, f64)>, f64)]) -> Self {
        let mut b = LayerBuilder::new(input_dim);
        for (terms, bias) in rows {
            b.row(terms, *bias);
        }
        Self::affine(b.build(Activation::Identity))
    }

    pub fn identity(n: usize) -> Self {
        Self::affine(AffineLayer::identity(n, Activation::Identity))
    }

    /// Selects coordinates `idx` of an `input_dim`-vector.
    pub fn projection(input_dim: usize, idx: &[usize]) -> Self {
        let rows: Vec<_> = idx.iter().map(|&i| (vec![(i, 1.0)], 0.0)).collect();
        Self::linear(input_dim, &rows)
    }

    /// Zero map with the given shape.
    pub fn zero(input_dim: usize, output_dim: usize) -> Self {
        let rows = vec![(Vec::new(), 0.0); output_dim];
        Self::linear(input_dim, &rows)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, AffineLayer::out_dim)
    }

    pub fn layers(&self) -> &[AffineLayer] {
        &self.layers
    }

    /// Mutable access for deliberate corruption in negative controls.
    pub fn layers_mut(&mut self) -> &mut [AffineLayer] {
        &mut self.layers
    }

    pub(crate) fn into_layers(self) -> Vec<AffineLayer> {
        self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    /// Output dimensions of the hidden layers.
    pub fn widthvec(&self) -> Vec<usize> {
        self.layers[..self.depth()].iter().map(AffineLayer::out_dim).collect()
    }

    pub fn width(&self) -> usize {
        self.widthvec().into_iter().max().unwrap_or(0)
    }

    pub fn size_report(&self) -> SizeReport {
        SizeReport {
            width: self.width(),
            depth: self.depth(),
            params: self.layers.iter().map(|l| l.out_dim() * (l.in_dim() + 1)).sum(),
        }
    }

    /// Total stored nonzero weights.
    pub fn nnz(&self) -> usize {
        self.layers.iter().map(AffineLayer::nnz).sum()
    }

    /// True when only the output layer uses identity activation.
    pub fn is_finalized(&self) -> bool {
        self.layers[..self.depth()].iter().all(|l| l.activation() == Activation::Relu)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(ForgeError::DimensionMismatch {
                layer: 0,
                expected: self.input_dim,
                found: x.len(),
            });
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(ForgeError::NonFinite(format!("input[{i}]")));
        }
        let mut scratch = EvalScratch::default();
        Ok(self.eval_with(x, &mut scratch).to_vec())
    }

    /// Unchecked evaluation reusing `scratch`. `x` must have length `input_dim`.
    pub fn eval_with<'s>(&self, x: &[f64], scratch: &'s mut EvalScratch) -> &'s [f64] {
        let EvalScratch { a, b } = scratch;
        a.clear();
        a.extend_from_slice(x);
        for l in &self.layers {
            l.apply(a, b);
            std::mem::swap(a, b);
        }
        a
    }

    /// First output at a scalar input, for one-dimensional networks.
    pub fn eval1(&self, x: f64) -> f64 {
        let mut s = EvalScratch::default();
        self.eval_with(&[x], &mut s)[0]
    }
}
