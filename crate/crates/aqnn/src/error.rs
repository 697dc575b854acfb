//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("matrix is not Hermitian: deviation {deviation:.3e} exceeds tolerance {tolerance:.3e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace deviates from 1 by {deviation:.3e}")]
    TraceNotOne { deviation: f64 },

    #[error("vector norm deviates from 1 by {deviation:.3e}")]
    NormNotOne { deviation: f64 },

    #[error("matrix is singular or nearly singular (min singular value {min_singular:.3e})")]
    Singular { min_singular: f64 },

    #[error("matrix is not unitary: deviation {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("non-finite entry produced in {context}")]
    NonFinite { context: &'static str },

    #[error("empty operator list")]
    EmptyList,

    #[error("channel is not completely positive: min eigenvalue {min_eigenvalue:.3e}")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("channel is not trace preserving: deviation {deviation:.3e}")]
    NotTracePreserving { deviation: f64 },

    #[error("correlation matrix diagonal entry {index} deviates from 1 by {deviation:.3e}")]
    DiagonalNotOne { index: usize, deviation: f64 },

    #[error("coupling block violates XX† ≤ 1: largest singular value {sigma_max:.6} > 1, so the channel would not be completely positive")]
    CouplingTooLarge { sigma_max: f64 },

    #[error("superposition coefficient {index} is zero; all coefficients must be nonzero")]
    ZeroCoefficient { index: usize },

    #[error("ensemble is not classical (max commutator norm {max_commutator_norm:.3e})")]
    NotClassical { max_commutator_norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigensolver failed to converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("operator basis is rank deficient after {retries} retries (rank {rank} < {expected})")]
    RankDeficient {
        rank: usize,
        expected: usize,
        retries: usize,
    },
}

impl Error {
    /// Shorthand used by validating constructors.
    pub(crate) fn dim(context: &'static str, expected: usize, actual: usize) -> Self {
        Error::DimensionMismatch {
            context,
            expected,
            actual,
        }
    }
}
