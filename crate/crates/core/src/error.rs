use alloc::string::String;

use crate::ptree::Validation;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("exponent p = {0} is outside [2, inf)")]
    Exponent(f64),

    #[error("malformed tree: {0}")]
    Structure(String),

    #[error("tree violates its invariants: {0}")]
    InvalidTree(Validation),

    #[error("level {level} is beyond tree depth {depth}")]
    Level { level: usize, depth: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("quadrature did not converge (achieved error estimate {achieved:e})")]
    Quadrature { achieved: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("time {t} is not a grid point of [0, {horizon}] with {steps} steps")]
    OffGrid { t: f64, horizon: f64, steps: usize },

    #[error("simulation needs {requested} stored samples, cap is {cap}")]
    Resource { requested: u64, cap: u64 },
}
