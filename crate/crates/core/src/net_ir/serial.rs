//! JSON network format.
//!
//! `{"version":1,"input_dim":d,"layers":[{"weights":[[..]],"bias":[..],"activation":"relu"|"identity"}]}`
//!
//! Weights are written densely, row-major, with shortest round-trip decimals.

use std::io::Write;
use std::path::Path;

use serde::ser::{SerializeSeq, SerializeStruct};
use serde::{Deserialize, Serialize, Serializer};

use super::layer::{Activation, AffineLayer};
use super::network::Network;
use crate::error::{ForgeError, Result};

pub const FORMAT_VERSION: u64 = 1;

struct NetView<'a>(&'a Network);
struct LayerView<'a>(&'a AffineLayer);
struct RowsView<'a>(&'a AffineLayer);
struct RowView<'a>(&'a AffineLayer, usize);

impl Serialize for NetView<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Network", 3)?;
        st.serialize_field("version", &FORMAT_VERSION)?;
        st.serialize_field("input_dim", &self.0.input_dim())?;
        let layers: Vec<LayerView> = self.0.layers().iter().map(LayerView).collect();
        st.serialize_field("layers", &layers)?;
        st.end()
    }
}

impl Serialize for LayerView<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Layer", 3)?;
        st.serialize_field("weights", &RowsView(self.0))?;
        st.serialize_field("bias", self.0.bias())?;
        st.serialize_field("activation", &self.0.activation())?;
        st.end()
    }
}

impl Serialize for RowsView<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.out_dim()))?;
        for r in 0..self.0.out_dim() {
            seq.serialize_element(&RowView(self.0, r))?;
        }
        seq.end()
    }
}

impl Serialize for RowView<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        // dense row streamed from the sparse storage
        let mut seq = s.serialize_seq(Some(self.0.in_dim()))?;
        let mut next = self.0.row(self.1).peekable();
        for c in 0..self.0.in_dim() {
            let v = match next.peek() {
                Some(&(col, v)) if col == c => {
                    next.next();
                    v
                }
                _ => 0.0,
            };
            seq.serialize_element(&v)?;
        }
        seq.end()
    }
}

fn check_finite(net: &Network) -> Result<()> {
    for (i, l) in net.layers().iter().enumerate() {
        for r in 0..l.out_dim() {
            if let Some((c, _)) = l.row(r).find(|(_, v)| !v.is_finite()) {
                return Err(ForgeError::NonFinite(format!("layers[{i}].weights[{r}][{c}]")));
            }
        }
        if let Some(r) = l.bias().iter().position(|v| !v.is_finite()) {
            return Err(ForgeError::NonFinite(format!("layers[{i}].bias[{r}]")));
        }
    }
    Ok(())
}

/// Stream the JSON form of `net` into `w`.
pub fn write_json<W: Write>(net: &Network, w: W) -> Result<()> {
    check_finite(net)?;
    serde_json::to_writer(w, &NetView(net)).map_err(|e| ForgeError::Io(e.into()))
}

pub fn serialize(net: &Network) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    write_json(net, &mut out)?;
    Ok(out)
}

pub fn save(net: &Network, path: &Path) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_json(net, f)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNet {
    version: u64,
    input_dim: usize,
    layers: Vec<RawLayer>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayer {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
    activation: Activation,
}

fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = bytes
        .split(|&b| b == b'\n')
        .take(line - 1)
        .map(|l| l.len() + 1)
        .sum();
    (line_start + column.saturating_sub(1)).min(bytes.len())
}

fn shape_error(path: String, message: String) -> ForgeError {
    ForgeError::Parse {
        path,
        offset: 0,
        line: 0,
        column: 0,
        message,
    }
}

pub fn deserialize(bytes: &[u8]) -> Result<Network> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let raw: RawNet = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ForgeError::Parse {
            path,
            offset: byte_offset(bytes, inner.line(), inner.column()),
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })?;
    de.end().map_err(|e| ForgeError::Parse {
        path: ".".into(),
        offset: byte_offset(bytes, e.line(), e.column()),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if raw.version != FORMAT_VERSION {
        return Err(ForgeError::VersionMismatch {
            found: raw.version,
            expected: FORMAT_VERSION,
        });
    }
    let mut layers = Vec::with_capacity(raw.layers.len());
    let mut in_dim = raw.input_dim;
    for (i, l) in raw.layers.into_iter().enumerate() {
        if l.weights.len() != l.bias.len() {
            return Err(shape_error(
                format!("layers[{i}].bias"),
                format!("{} bias entries for {} weight rows", l.bias.len(), l.weights.len()),
            ));
        }
        for (r, row) in l.weights.iter().enumerate() {
            if row.len() != in_dim {
                return Err(shape_error(
                    format!("layers[{i}].weights[{r}]"),
                    format!("row has {} entries, expected {in_dim}", row.len()),
                ));
            }
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(ForgeError::NonFinite(format!("layers[{i}].weights[{r}][{c}]")));
            }
        }
        if let Some(r) = l.bias.iter().position(|v| !v.is_finite()) {
            return Err(ForgeError::NonFinite(format!("layers[{i}].bias[{r}]")));
        }
        let out = l.bias.len();
        let layer = if l.weights.is_empty() {
            crate::net_ir::LayerBuilder::new(in_dim).build(l.activation)
        } else {
            AffineLayer::from_dense(&l.weights, l.bias, l.activation)?
        };
        layers.push(layer);
        in_dim = out;
    }
    Network::new(raw.input_dim, layers)
}

pub fn load(path: &Path) -> Result<Network> {
    deserialize(&std::fs::read(path)?)
}
