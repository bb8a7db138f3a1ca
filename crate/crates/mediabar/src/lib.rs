//! IO, file formats and command-line orchestration around `mediabar-core`.

pub mod cli;
pub mod config;
mod error;
pub mod fixture;
pub mod formats;
pub mod ingest;
pub mod pipeline;
pub mod ppm;
pub mod wav;

pub use error::{Error, Result};
