// Copyright 2026 The ctoqw Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the walk library.
///
/// Variants fall in two families: input validation (bad shapes, bad
/// files, out-of-range parameters) and numerical degeneracy (a computation
/// ran but its result cannot be trusted). [`Error::is_numerical`] tells them
/// apart; the CLI maps them to exit codes 1 and 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not a density matrix: {0}")]
    NotDensity(String),

    #[error("zero vector cannot be normalized")]
    ZeroVector,

    #[error("coin does not move the walker: C = A = 0")]
    NoMovement,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operation requires coin dimension 2, got {0}")]
    UnsupportedDimension(usize),

    #[error("auxiliary generator has an empty kernel (numerical failure)")]
    NoStationaryState,

    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    #[error("state is not stationary (residual {residual:.3e})")]
    NotStationary { residual: f64 },

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("truncation leakage {leaked:.3e} exceeds {limit:.1e} at radius {radius}; enlarge the truncation")]
    LeakageExceeded { leaked: f64, limit: f64, radius: usize },

    #[error("cannot condition on site with probability {probability:.3e}")]
    NegligibleProbability { probability: f64 },

    #[error("survival probability stays above {level:.6} beyond t = {horizon:.3e}")]
    SurvivalPlateau { level: f64, horizon: f64 },

    #[error("jump-count guard of {limit} jumps breached before horizon")]
    JumpGuard { limit: usize },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a numerical computation as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite
                | Error::NoStationaryState
                | Error::Degenerate(_)
                | Error::NotStationary { .. }
                | Error::StepUnderflow { .. }
                | Error::LeakageExceeded { .. }
                | Error::NegligibleProbability { .. }
                | Error::SurvivalPlateau { .. }
                | Error::JumpGuard { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
