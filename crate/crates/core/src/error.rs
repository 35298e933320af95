//! Error type shared by the library.

use thiserror::Error;

/// Errors produced by construction, integration, and analysis routines.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not skew-symmetric within tolerance (residual {residual:.3e})")]
    NotSkewSymmetric { residual: f64 },

    #[error("state became non-finite at t = {time:.6} s during integration: {detail}")]
    NonFiniteState { time: f64, detail: String },

    #[error("lifted pose block is degenerate: {0}")]
    DegeneratePose(String),

    #[error("transformed input is infeasible: rotor commands {commands:?} contain negative entries")]
    InfeasibleInput { commands: [f64; 4] },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("problem size {size} exceeds the dense-solver guard ({limit})")]
    SizeGuard { size: usize, limit: usize },

    #[error("regression input is rank deficient (rank {rank} of {expected}, condition {condition:.3e})")]
    RankDeficient {
        rank: usize,
        expected: usize,
        condition: f64,
    },

    #[error("not enough snapshots: got {got}, need at least {need}")]
    NotEnoughSnapshots { got: usize, need: usize },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}
