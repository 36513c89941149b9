//! Granular approximations of fuzzy sets.
//!
//! Given a fuzzy T-preorder over a finite set of instances and observed
//! membership degrees, the solvers in [`approx`] return the granularly
//! representable fuzzy set closest to the observations under a quantile or
//! squared loss. Quantile problems are solved through their network-flow
//! duals ([`flow`]); [`oracle`] holds slow, independent reference solvers used
//! by the test suites.

pub mod approx;
pub mod connectives;
pub mod error;
pub mod flow;
pub mod io;
pub mod oracle;
pub mod random;
pub mod relation;
pub mod rough;

/// Global comparison tolerance for degrees and constraint checks.
pub const EPS: f64 = 1e-9;

pub use approx::{
    complement_solve, granular_approx_mse, granular_approx_quantile, monotone_approximation_crisp,
    quantile_band, GranularApproximation, GranularProblem, LossSpec, SolveOptions,
};
pub use connectives::{Bijection, Degree, Family, ResidualTriplet};
pub use error::{Error, Result};
pub use relation::{Dataset, FuzzyRelation, TransitivityViolation};
pub use rough::{FuzzySet, GranularityReport, GranularityViolation};
