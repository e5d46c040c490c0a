use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

/// One step of an iterative solve, kept for failure diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub shift: f64,
    pub estimate: f64,
    pub change: f64,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("x = {x} lies outside [0, 1]")]
    Domain { x: f64 },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("invalid problem:\n{0}")]
    Invalid(ValidationReport),

    #[error("profile constant, (A4) violated")]
    ConstantProfile,

    #[error("degenerate interval ({a}, {b}): length below 1e-8")]
    DegenerateInterval { a: f64, b: f64 },

    #[error("grid needs at least {min} nodes, got {got}")]
    GridTooSmall { min: usize, got: usize },

    #[error("mesh too coarse: {0}")]
    MeshTooCoarse(String),

    #[error("inverse iteration broke down after {retries} shift perturbations")]
    Breakdown { retries: usize },

    #[error("no convergence after {} iterations", .trace.len())]
    NoConvergence { trace: Vec<IterationRecord> },

    #[error("inner solve stagnated at relative residual {:.3e}", .history.last().copied().unwrap_or(f64::NAN))]
    Stagnation { history: Vec<f64> },

    #[error("declared maximum ({x}, {y}) is not a grid-local maximum of m")]
    NotALocalMaximum { x: f64, y: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
