//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by state construction, walk execution, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// Two states or composites were combined with incompatible tensor slots.
    #[error("slot signature mismatch: expected {expected}, got {got}")]
    SlotMismatch { expected: String, got: String },

    /// Two states of different dimension were combined.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// A state vector could not be normalized or failed a normalization check.
    #[error("state is not normalizable: squared norm {norm_sq}")]
    NotNormalizable { norm_sq: f64 },

    /// A sequence of indices is not a permutation of `0..n`.
    #[error("not a valid permutation: {reason}")]
    InvalidPermutation { reason: String },

    /// A basis index was outside the detector sea.
    #[error("basis index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    /// The detector sea needs at least two states.
    #[error("detector sea requires N >= 2, got {n}")]
    SeaTooSmall { n: usize },

    /// A sampling grid does not cover the packets it must hold.
    #[error("grid [{min}, {max}] too small: packets need coverage to {needed_min} and {needed_max}")]
    GridTooSmall {
        min: f64,
        max: f64,
        needed_min: f64,
        needed_max: f64,
    },

    /// Two grids with different geometry were combined.
    #[error("grid mismatch: packets must share one grid")]
    GridMismatch,

    /// Coordinates do not form a valid probability simplex point.
    #[error("invalid simplex point: {reason}")]
    InvalidSimplexPoint { reason: String },

    /// Configuration field outside its allowed range.
    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: String },

    /// `step` was called on a walk that has already been absorbed.
    #[error("walk already absorbed at vertex {vertex}")]
    AlreadyAbsorbed { vertex: usize },

    /// A walk exceeded its safety step bound.
    #[error("walk exceeded max_steps = {max_steps} without absorbing")]
    RunawayWalk { max_steps: u64 },

    /// The absorption oracle was asked to enumerate too many lattice states.
    #[error("lattice state space has {states} states, above the {limit} enumeration limit")]
    StateSpaceTooLarge { states: u128, limit: u64 },

    /// The oracle's iterative solve failed to reach its residual target.
    #[error("absorption solve stalled: residual {residual} after {sweeps} sweeps")]
    SolveStalled { residual: f64, sweeps: u64 },

    /// Every run of an ensemble was discarded by efficiency thinning.
    #[error("degenerate ensemble: no run registered (runs = {runs}, efficiency = {efficiency})")]
    DegenerateEnsemble { runs: u64, efficiency: f64 },

    /// Chi-square needs a minimum expected count per cell.
    #[error("insufficient sample for chi-square: expected count {expected:.3} < 5 at vertex {vertex}")]
    InsufficientSample { vertex: usize, expected: f64 },

    /// A numeric literal on the command line could not be parsed.
    #[error("malformed input: {reason}")]
    MalformedInput { reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad inputs rather than runtime failures.
    ///
    /// The CLI maps validation errors to exit code 2 and everything else to 1.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::RunawayWalk { .. }
                | Error::SolveStalled { .. }
                | Error::Io { .. }
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
