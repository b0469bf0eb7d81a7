//! Sup-error measurement on grids and certificates comparing it with the budgets.

mod certify;
mod grid;
mod measure;

pub use certify::{
    build_network, certify, certify_network, tolerance, CertParams, Certificate, CsvRow, Recipe, CSV_HEADER,
    EXACT_TOLERANCE, ROUNDOFF_TOLERANCE,
};
pub use grid::{GridSpec, RegionFilter};
pub use measure::{sup_error, sup_error_at, SupError};
