//! Exact discrete encoders: sample fitting, width-for-depth exchange, step
//! functions, bit extraction and point matching.

mod bits;
mod fit;
mod point_match;
mod step;

pub use bits::{bit_extract_cumsum, bit_extract_single, BitTable};
pub use fit::{fit_samples, width_to_depth, SampleSet};
pub use point_match::{bit_count, point_match, point_match_with, quantize, BitRounding, CoefficientVector};
pub use step::{cells_per_axis, int_root, step_function};
