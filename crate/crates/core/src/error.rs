use thiserror::Error;

use crate::relation::TransitivityViolation;

/// Errors raised by construction, validation and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degree {value} lies outside [0, 1]")]
    InvalidDegree { value: f64 },

    #[error("invalid bijection: {0}")]
    InvalidBijection(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("attribute {attribute} has zero range")]
    ZeroRange { attribute: usize },

    #[error("attribute range for attribute {attribute} must be strictly positive, got {value}")]
    InvalidRange { attribute: usize, value: f64 },

    #[error("relation is not reflexive at instance {instance}")]
    NotReflexive { instance: usize },

    #[error("relation is not T-transitive: {} violating triple(s)", violations.len())]
    NotTransitive { violations: Vec<TransitivityViolation> },

    #[error("relation is not crisp: entry ({u}, {v}) = {value}")]
    NotCrisp { u: usize, v: usize, value: f64 },

    #[error("unsupported t-norm family for this operation: {0}")]
    UnsupportedFamily(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("multiplier on edge ({from}, {to}) must be positive, got {value}")]
    NonPositiveMultiplier { from: usize, to: usize, value: f64 },

    #[error("parallel edge ({from}, {to}) in flow network")]
    ParallelEdge { from: usize, to: usize },

    #[error("demand cannot be met: {0}")]
    Infeasible(String),

    #[error("negative-cost cycle in residual network through nodes {cycle:?}")]
    NegativeCycle { cycle: Vec<usize> },

    #[error("iteration cap of {cap} exceeded ({context})")]
    IterationCap { cap: usize, context: String },

    #[error("solver did not converge after {iterations} sweeps (last update {last_update:e}, KKT residual {kkt_residual:e})")]
    Convergence {
        iterations: usize,
        last_update: f64,
        kkt_residual: f64,
    },

    #[error("instance too large for exhaustive search: n = {n}, limit {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
