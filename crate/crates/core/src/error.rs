use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument outside its domain: {0}")]
    Domain(String),

    #[error("grid too coarse: m = {m} does not support penalty order s = {s} (need m >= s + 1)")]
    GridTooCoarse { m: usize, s: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("cluster has no points")]
    EmptyCluster,

    #[error("invalid data: {0}")]
    Data(String),

    #[error("degenerate design: fewer than {need} distinct observation times")]
    DegenerateDesign { need: usize },

    #[error("too few points: n = {n} < k = {k}")]
    TooFewPoints { n: usize, k: usize },

    #[error("separation violated: min gap {min_gap} < delta {delta}")]
    SeparationViolated { min_gap: f64, delta: f64 },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("model assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
