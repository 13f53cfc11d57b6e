use thiserror::Error;

use crate::quasiprob::QuasiProbability;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {invariant} violated (magnitude {magnitude:.3e})")]
    Invalid { invariant: String, magnitude: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },

    #[error("operation annihilated the state (trace {trace:.3e})")]
    Annihilated { trace: f64 },

    #[error("operation class error: expected {expected}, found {found}")]
    WrongClass { expected: String, found: String },

    #[error("local operator is ill-conditioned (condition number {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("ensemble member {member} has Schmidt rank {member_rank} above generator rank {generator_rank}")]
    RankExceeded {
        member: usize,
        member_rank: usize,
        generator_rank: usize,
    },

    #[error("no restart converged ({restarts} restarts, best residual {best_residual:.3e})")]
    Convergence { restarts: usize, best_residual: f64 },

    #[error("incomplete r-SE basis at r={level}: reconstruction residual {residual:.3e}")]
    IncompleteBasis {
        level: usize,
        residual: f64,
        partial: Box<QuasiProbability>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(invariant: impl Into<String>, magnitude: f64) -> Self {
        Error::Invalid {
            invariant: invariant.into(),
            magnitude,
        }
    }

    pub(crate) fn dims(expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Convergence { .. } => 3,
            Error::IncompleteBasis { .. } => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
