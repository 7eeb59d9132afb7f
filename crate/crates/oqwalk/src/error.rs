//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while building or running a simulation.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Two operands (or an operand and a map) disagree in dimension.
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// An operation required a Hermitian matrix and the input was not one.
    #[error("matrix is not Hermitian (max |A - A^dagger| = {max_dev:.3e})")]
    NotHermitian { max_dev: f64 },

    /// A matrix inversion or linear solve hit a numerically singular operator.
    #[error(
        "operator is numerically singular \
         (sigma_min/sigma_max = {ratio:.3e} below floor {floor:.3e})"
    )]
    SingularOperator { ratio: f64, floor: f64 },

    /// A rate times the time step left the valid probability range [0, 1].
    #[error(
        "time step too large for {label}: rate {rate:.6e}/s * dt {dt:.6e}s \
         = {probability:.6e} is outside [0, 1]"
    )]
    TimeStepTooLarge {
        label: String,
        rate: f64,
        dt: f64,
        probability: f64,
    },

    /// A graph failed structural validation (bad node index, bad dt, ...).
    #[error("invalid reaction graph: {0}")]
    InvalidGraph(String),

    /// The target occupation never reached the requested threshold.
    #[error(
        "occupation of node {target} never reached eta = {eta} within \
         {max_steps} steps (final value {reached:.6e})"
    )]
    ThresholdNotReached {
        target: usize,
        eta: f64,
        max_steps: u64,
        reached: f64,
    },

    /// A hitting distribution still carries too much mass past its cap.
    #[error(
        "hitting-distribution tail mass {tail_mass:.3e} still exceeds \
         {bound:.3e} after {n_max} steps"
    )]
    TailTooHeavy {
        tail_mass: f64,
        bound: f64,
        n_max: u64,
    },

    /// The absorbing node cannot be reached from the initial node at all.
    #[error("node {target} is unreachable from node {initial} (1-based labels)")]
    TargetUnreachable { target: usize, initial: usize },

    /// The generating-function argument lies outside the convergence region.
    #[error(
        "generating-function argument |z| = {z_abs:.6} lies outside the \
         convergence region (|z| <= 1 or |z| < 1/{spectral_radius:.6})"
    )]
    OutsideConvergence { z_abs: f64, spectral_radius: f64 },

    /// An operation that only makes sense in the classical limit was asked to
    /// run on a graph that still has live coherences.
    #[error("classical-limit operation requires full dephasing: {0}")]
    NotClassical(String),

    /// A computation produced a non-finite number.
    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    /// A config file failed to parse or validate.
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),

    /// A sweep failed at one grid point; carries the offending value.
    #[error("sweep point {parameter} = {value:.6e}: {source}")]
    AtGridPoint {
        parameter: &'static str,
        value: f64,
        #[source]
        source: Box<Error>,
    },
}
