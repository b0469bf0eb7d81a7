//! The Taylor construction on `[0,1]^d`: cell selection, stored coefficients,
//! local monomials, repair of the trifling region and the end-to-end approximant.

mod mid;
pub mod presets;
mod smooth;
mod target;
mod taylor;
mod trifling;

pub use mid::{mid_network, remove_trifling};
pub use smooth::{approx_smooth, approx_smooth_detailed, choose_delta, rate, SmoothApprox};
pub use target::{DerivFn, EvalFn, ModulusFn, TargetFunction, FD_STEP};
pub use taylor::{build_taylor_core, error_budget, ErrorBudget, TaylorCore, TaylorPlan};
pub use trifling::{CellIndex, TriflingRegion};
