use serde::{Deserialize, Serialize};

use crate::error::{ForgeError, Result};

/// Activation applied after an affine map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

/// One affine map `x -> W x + b` followed by an activation.
///
/// Weights are kept in compressed-row form. The constructions in this crate
/// are mostly block-diagonal, and the wide ones would not fit in memory as
/// dense matrices. Exact zeros are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineLayer {
    in_dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    bias: Vec<f64>,
    activation: Activation,
}

impl AffineLayer {
    /// Build from a dense row-major matrix.
    pub fn from_dense(weights: &[Vec<f64>], bias: Vec<f64>, activation: Activation) -> Result<Self> {
        let in_dim = weights.first().map_or(0, Vec::len);
        if weights.len() != bias.len() {
            return Err(ForgeError::ShapeMismatch(format!(
                "{} weight rows but {} bias entries",
                weights.len(),
                bias.len()
            )));
        }
        let mut b = LayerBuilder::new(in_dim);
        for (r, (row, &c)) in weights.iter().zip(&bias).enumerate() {
            if row.len() != in_dim {
                return Err(ForgeError::ShapeMismatch(format!(
                    "row {r} has {} columns, expected {in_dim}",
                    row.len()
                )));
            }
            let terms: Vec<(usize, f64)> = row.iter().copied().enumerate().collect();
            b.row(&terms, c);
        }
        Ok(b.build(activation))
    }

    /// Square identity map of size `n`.
    pub fn identity(n: usize, activation: Activation) -> Self {
        let mut b = LayerBuilder::new(n);
        for i in 0..n {
            b.row(&[(i, 1.0)], 0.0);
        }
        b.build(activation)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.bias.len()
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// Number of stored (nonzero) weights.
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Nonzero entries of row `r` as `(column, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn weight(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => 0.0,
        }
    }

    /// Overwrite one weight. Setting zero removes the entry.
    pub fn set_weight(&mut self, r: usize, c: usize, v: f64) {
        let mut rows: Vec<Vec<(usize, f64)>> = (0..self.out_dim()).map(|i| self.row(i).collect()).collect();
        rows[r].retain(|&(col, _)| col != c);
        rows[r].push((c, v));
        let mut b = LayerBuilder::new(self.in_dim);
        for (terms, &bias) in rows.iter().zip(&self.bias) {
            b.row(terms, bias);
        }
        *self = b.build(self.activation);
    }

    pub fn set_bias(&mut self, r: usize, v: f64) {
        self.bias[r] = v;
    }

    pub fn dense_weights(&self) -> Vec<Vec<f64>> {
        (0..self.out_dim())
            .map(|r| {
                let mut row = vec![0.0; self.in_dim];
                for (c, v) in self.row(r) {
                    row[c] = v;
                }
                row
            })
            .collect()
    }

    pub fn with_activation(mut self, activation: Activation) -> Self {
        self.activation = activation;
        self
    }

    /// `out = act(W x + b)`.
    pub(crate) fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.reserve(self.out_dim());
        for r in 0..self.out_dim() {
            let mut acc = self.bias[r];
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            if self.activation == Activation::Relu && acc < 0.0 {
                acc = 0.0;
            }
            out.push(acc);
        }
    }

    /// The affine map `self ∘ inner` (inner's activation is ignored; ours is kept).
    pub(crate) fn after(&self, inner: &AffineLayer) -> AffineLayer {
        debug_assert_eq!(self.in_dim, inner.out_dim());
        let mut scratch = vec![0.0; inner.in_dim];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![false; inner.in_dim];
        let mut b = LayerBuilder::new(inner.in_dim);
        for r in 0..self.out_dim() {
            let mut bias = self.bias[r];
            for (k, w) in self.row(r) {
                bias += w * inner.bias[k];
                for (c, v) in inner.row(k) {
                    if !mark[c] {
                        mark[c] = true;
                        touched.push(c);
                    }
                    scratch[c] += w * v;
                }
            }
            touched.sort_unstable();
            let terms: Vec<(usize, f64)> = touched.iter().map(|&c| (c, scratch[c])).collect();
            for &c in &touched {
                scratch[c] = 0.0;
                mark[c] = false;
            }
            touched.clear();
            b.row(&terms, bias);
        }
        b.build(self.activation)
    }

    /// Stack the rows of several layers, shifting each one's columns by its offset.
    pub(crate) fn stack(parts: &[(&AffineLayer, usize)], in_dim: usize, activation: Activation) -> AffineLayer {
        let mut b = LayerBuilder::new(in_dim);
        for (layer, offset) in parts {
            for r in 0..layer.out_dim() {
                let terms: Vec<(usize, f64)> = layer.row(r).map(|(c, v)| (c + offset, v)).collect();
                b.row(&terms, layer.bias[r]);
            }
        }
        b.build(activation)
    }
}

/// Row-at-a-time construction of an [`AffineLayer`].
#[derive(Debug, Clone)]
pub struct LayerBuilder {
    in_dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    bias: Vec<f64>,
}

impl LayerBuilder {
    pub fn new(in_dim: usize) -> Self {
        Self {
            in_dim,
            row_ptr: vec![0],
            cols: Vec::new(),
            vals: Vec::new(),
            bias: Vec::new(),
        }
    }

    /// Add a row; repeated columns are summed. Returns the row index.
    pub fn row(&mut self, terms: &[(usize, f64)], bias: f64) -> usize {
        let mut t: Vec<(usize, f64)> = terms.to_vec();
        t.sort_by_key(|&(c, _)| c);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(t.len());
        for (c, v) in t {
            assert!(c < self.in_dim, "column {c} out of range for input width {}", self.in_dim);
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += v,
                _ => merged.push((c, v)),
            }
        }
        for (c, v) in merged {
            if v != 0.0 {
                self.cols.push(c);
                self.vals.push(v);
            }
        }
        self.row_ptr.push(self.cols.len());
        // normalise -0.0 so serialisation round-trips bit for bit
        self.bias.push(if bias == 0.0 { 0.0 } else { bias });
        self.bias.len() - 1
    }

    pub fn len(&self) -> usize {
        self.bias.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bias.is_empty()
    }

    pub fn build(self, activation: Activation) -> AffineLayer {
        AffineLayer {
            in_dim: self.in_dim,
            row_ptr: self.row_ptr,
            cols: self.cols,
            vals: self.vals,
            bias: self.bias,
            activation,
        }
    }
}
