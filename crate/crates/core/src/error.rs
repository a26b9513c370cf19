use thiserror::Error;

use crate::chain::State;

/// Errors produced by the simulation, estimation and bound routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("kernel sampling failed at step {step}: {source}")]
    Sampling {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("replication with seed {seed}, stream {stream} failed: {source}")]
    Replication {
        seed: u64,
        stream: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("rejection sampler exceeded {cap} proposals")]
    RejectionCap { cap: usize },

    #[error("transition matrix is not row-stochastic: row {row} sums to {sum}")]
    NotStochastic { row: usize, sum: f64 },

    #[error("transition matrix is reducible: state {from} cannot reach state {to}")]
    Reducible { from: usize, to: usize },

    #[error("transition matrix is periodic with period {period}")]
    Periodic { period: usize },

    #[error("linear solve for the stationary law failed: {0}")]
    Singular(String),

    #[error("minorization violated at x = {x}, y = {y}: ratio {ratio}")]
    CertificateViolation { x: State, y: State, ratio: f64 },

    #[error("domination violated: P({x}, {y}) = {p} < delta * psi = {bound}")]
    Domination { x: usize, y: usize, p: f64, bound: f64 },

    #[error("trajectory has no regeneration flags")]
    MissingFlags,

    #[error("no regenerations observed")]
    NoRegenerations,

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("size limit exceeded: {0}; use the greedy covering mode")]
    SizeLimit(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn in_replication(seed: u64, stream: u64) -> impl FnOnce(Error) -> Error {
    move |e| Error::Replication { seed, stream, source: Box::new(e) }
}
