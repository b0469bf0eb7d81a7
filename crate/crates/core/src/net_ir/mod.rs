//! Network representation, evaluation, combinators and the JSON format.

mod combinators;
mod layer;
mod network;
pub mod serial;

pub use combinators::{collapse_identity_layers, compose, pad_depth, parallel, postcompose, precompose};
pub use layer::{Activation, AffineLayer, LayerBuilder};
pub use network::{EvalScratch, Network, SizeReport};
pub use serial::{deserialize, serialize};
