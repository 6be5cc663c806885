use std::io;

use thiserror::Error;

/// Errors produced anywhere in the inference pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("gap at ({id},{t})")]
    Gap { id: String, t: i64 },

    #[error("ragged dimensions: row {row} has {found} coordinates, expected {expected}")]
    RaggedDimension {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("duplicate row for ({id},{t})")]
    DuplicateRow { id: String, t: i64 },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("window [{start}, {end}) is outside a series of length {len}")]
    WindowOutOfRange { start: usize, end: usize, len: usize },

    #[error("empty time series")]
    EmptySeries,

    #[error("series dimensions differ ({left} vs {right})")]
    DimensionMismatch { left: usize, right: usize },

    #[error("band {band} admits no warping path between lengths {left} and {right}")]
    InfeasibleBand {
        band: usize,
        left: usize,
        right: usize,
    },

    #[error("empty warping path")]
    EmptyPath,

    #[error("a following network needs at least two series, got {0}")]
    TooFewSeries(usize),

    #[error("node {0} is not an initiator")]
    NotInitiator(usize),

    #[error("pagerank did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("perturbation not applicable: {0}")]
    Perturbation(String),

    #[error("mismatched individuals: {0}")]
    Mismatch(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
