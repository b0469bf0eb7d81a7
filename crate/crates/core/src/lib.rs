//! Explicit ReLU network constructions for smooth functions on `[0,1]^d`,
//! with width, depth and sup-norm error certificates.

pub mod assembly;
pub mod bounds;
pub mod encoders;
pub mod error;
pub mod net_ir;
pub mod primitives;
pub mod verify;

pub use assembly::{approx_smooth, TargetFunction, TriflingRegion};
pub use bounds::{bounds, BoundKind, BoundParams, Bounds};
pub use error::{ForgeError, Result};
pub use net_ir::{Activation, AffineLayer, Network, SizeReport};
pub use primitives::{MultiIndex, SizeBudget};
pub use verify::{certify, Certificate, GridSpec, Recipe};
