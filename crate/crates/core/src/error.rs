//! Error taxonomy shared by all modules.
//!
//! Variants carry `f64` payloads regardless of the scalar the computation ran
//! with, so the type stays non-generic and cheap to thread through CLI code.

use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("evaluation point coincides with the kernel singularity")]
    CoincidentPoints,

    #[error("derivative order {order} exceeds the implementation cap {cap}")]
    UnsupportedOrder { order: usize, cap: usize },

    #[error("point outside the domain of validity: {0}")]
    OutOfDomain(String),

    #[error(
        "tail exponent g = {g} is too large for the classical operator (needs g < 2s = {bound}); \
         use the compensated operator instead"
    )]
    TailDivergence { g: f64, bound: f64 },

    #[error(
        "tail exponent g = {g} violates the growth condition g < 2s + k = {bound} \
         required for compensation order k"
    )]
    NotInGrowthClass { g: f64, bound: f64 },

    #[error(
        "exterior data grows too fast for the standard solve (g = {g} needs g < 2s = {bound}); \
         pose it as a compensated problem through solve_divergent"
    )]
    StandardSolveTail { g: f64, bound: f64 },

    #[error("exterior integrand does not decay: declared decay margin {eta} <= 0")]
    NonIntegrableTail { eta: f64 },

    #[error("integrand returned a non-finite value at {point:?}")]
    NonFiniteSample { point: Vec<f64> },

    #[error("function declares smoothness order {declared}, but {required} is required here")]
    InsufficientSmoothness { required: usize, declared: usize },

    #[error("derivatives up to order {required} requested, only {available} available")]
    DerivativeUnavailable { required: usize, available: usize },

    #[error("grid with {points} points cannot resolve a fit with {unknowns} unknowns")]
    GridTooCoarse { points: usize, unknowns: usize },

    #[error("fit matrix is numerically rank deficient; retry with a ridge weight > 0")]
    IllConditionedFit,

    #[error("exit sampler degenerate: acceptance rate {rate:.2e} (start point too close to the boundary)")]
    SamplerDegenerate { rate: f64 },

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// Process exit class for the CLI: `2` for validation problems,
    /// `3` for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonFiniteSample { .. }
            | Error::QuadratureFailure(_)
            | Error::SamplerDegenerate { .. }
            | Error::IllConditionedFit => 3,
            _ => 2,
        }
    }
}
