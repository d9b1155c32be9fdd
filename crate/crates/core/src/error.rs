// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed scheme, profile or PLA text. `line` and `column` are 1-based.
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid machine configuration: {0}")]
    Config(String),

    #[error("slot with no connection: {0}")]
    UnconnectedSlot(String),

    #[error("{vars} support variables exceed the cap of {cap}")]
    TooManyVariables { vars: usize, cap: usize },

    #[error("mask popcount {popcount} does not divide {ports} retained read ports")]
    PopcountNotDivisor { popcount: usize, ports: usize },

    #[error("infeasible mask assignment: {0}")]
    Infeasible(String),

    #[error("width mismatch: {0}")]
    WidthMismatch(String),

    #[error("scheme is not symmetric; the occupancy model is defined only for disjoint covering masks")]
    NotSymmetric,

    #[error("threshold must be positive")]
    InvalidThreshold,

    #[error("schemes use different machine configurations")]
    ConfigMismatch,

    #[error("{0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}
