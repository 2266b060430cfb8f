use thiserror::Error;

use crate::solver::Solution;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("arms end in different central ranks: {0:?}")]
    MismatchedCentralRank(Vec<usize>),

    #[error("invalid flag string {0:?}: entries must be nonempty, positive and strictly increasing")]
    InvalidFlag(Vec<usize>),

    #[error("invalid quiver: {0}")]
    InvalidQuiver(String),

    #[error("arm {arm} has flag {flag:?}, which is neither complete nor minimal")]
    UnsupportedFlagType { arm: usize, flag: Vec<usize> },

    #[error("arms are not identical; cannot merge into a wild arm")]
    NonIdenticalArms,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("arm {0} does not start at rank 1")]
    ArmNotBased(usize),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid level vector: {0}")]
    InvalidLevel(String),

    #[error("solver did not converge (best aggregate residual {:.3e})", .0.residual.aggregate)]
    NotConverged(Box<Solution>),

    #[error("point is singular: rank gap {0:.3e} below threshold")]
    SingularPoint(f64),

    #[error("punctures must be pairwise distinct")]
    DuplicatePunctures,

    #[error("evaluation point coincides with puncture {0}")]
    EvaluationAtPole(usize),

    #[error("representation is off-shell (aggregate residual {0:.3e})")]
    NotOnShell(f64),

    #[error("involution classification inconclusive for structure {0}")]
    Inconclusive(String),

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
