//! Monte-Carlo oracle: sample the matrix model, evaluate bracketed
//! expressions on it, and estimate trace means and covariances with
//! standard errors.

pub mod ensemble;
pub mod estimate;
pub mod eval;
pub mod matrix;
pub mod rng;

pub use ensemble::{Bindings, DetBuilder, DetFamily, EnsembleSpec, EntryLawKind, Symbol};
pub use estimate::{estimate, h5_diagnostic, regression_slope, Report};
pub use eval::TraceEvaluator;
pub use matrix::{Matrix, C64};
