//! Error type shared by the whole crate.
//!
//! Norms and residuals carried inside errors are stored as `f64` regardless
//! of the working scalar so the enum stays object-safe and printable.

use thiserror::Error;

/// Pipeline stage labels used when wrapping a failure with its origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    BuildW,
    MainEquation,
    Recovery,
    Oracle,
    RootSearch,
}

impl core::fmt::Display for Stage {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let name = match self {
            Stage::BuildW => "build_w",
            Stage::MainEquation => "main_equation",
            Stage::Recovery => "recovery",
            Stage::Oracle => "forward_oracle",
            Stage::RootSearch => "root_search",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid functions have different sizes: {left} vs {right}")]
    GridMismatch { left: usize, right: usize },

    #[error("grid needs at least {needed} points, got {got}")]
    GridTooSmall { needed: usize, got: usize },

    #[error("convolution power requires order >= 1")]
    InvalidConvOrder,

    #[error("spectrum head must contain at least one eigenvalue")]
    EmptySpectrumHead,

    #[error("spectrum head of length {got} is too short; need {needed}")]
    InsufficientHead { needed: usize, got: usize },

    #[error("input failed validation: {0}")]
    Validation(String),

    #[error(
        "series truncation failed: term norm {last_term_norm:e} still above \
         threshold at the order cap"
    )]
    TruncationFailure { last_term_norm: f64 },

    #[error("fixed-point iteration did not converge in {iterations} steps")]
    NonConvergence {
        iterations: usize,
        /// Trailing step-size history, oldest first.
        history: Vec<f64>,
    },

    #[error("fixed-point iteration diverged after {iterations} steps")]
    Diverged {
        iterations: usize,
        history: Vec<f64>,
    },

    #[error("root search failed for mode indices {indices:?}")]
    RootSearchFailed { indices: Vec<usize> },

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed data: {0}")]
    Parse(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wraps an error with the pipeline stage it came from.
    pub fn at_stage(self, stage: Stage) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
