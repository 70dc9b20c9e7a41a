//! Command implementations and the HTTP service behind the `linelod` binary.
//!
//! - [`params`]: parsing of camera, size, lens and render flags shared by the
//!   CLI and the `/render` endpoint.
//! - [`commands`]: `preprocess`, `render` and `bench`.
//! - [`service`]: the read-only `/meta`, `/query` and `/render` API.

pub mod commands;
pub mod params;
pub mod service;

use std::fmt;

#[derive(Debug)]
pub enum AppError {
    /// An input file could not be read.
    Input(String),
    /// A malformed argument or request field.
    Usage(String),
    Core(linelod_core::Error),
}

impl AppError {
    /// Process exit code for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Input(_) | AppError::Usage(_) => 2,
            AppError::Core(_) => 1,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Input(m) => write!(f, "{m}"),
            AppError::Usage(m) => write!(f, "{m}"),
            AppError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for AppError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            AppError::Core(e) => Some(e),
            _ => None,
        }
    }
}

impl From<linelod_core::Error> for AppError {
    fn from(e: linelod_core::Error) -> Self {
        AppError::Core(e)
    }
}
