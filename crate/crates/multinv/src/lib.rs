//! File formats, experiment specs and the experiment harness around
//! [`multinv_core`].

#![recursion_limit = "256"]

use std::io;

pub use multinv_core;

pub mod experiments;
pub mod fixture;
pub mod formats;
pub mod report;
pub mod spec;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("fixture {name:?}: {message}")]
    Fixture { name: String, message: String },
    #[error("spec line {line}: {message}")]
    Spec { line: usize, message: String },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("{0}")]
    Core(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Bad input, as opposed to a failed assertion or an environment problem.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Fixture { .. } | Error::Spec { .. } | Error::Format { .. } | Error::Core(_))
    }
}

macro_rules! core_error {
    ($($t:ty),*) => {$(
        impl From<$t> for Error {
            fn from(e: $t) -> Self {
                Error::Core(e.to_string())
            }
        }
    )*};
}

core_error!(
    multinv_core::intset::IntSetError,
    multinv_core::pipeline::PipelineError,
    multinv_core::tree::TreeError,
    multinv_core::fractal::FractalError,
    multinv_core::projection::ProjectionError,
    multinv_core::DigitError
);
