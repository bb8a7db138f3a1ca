//! Numerical core for multimodal video characterization.
//!
//! Everything in this crate is pure computation over in-memory values: color
//! barcodes, the MFCC chain, TF-IDF text vectors, seeded K-means with
//! silhouette/elbow model selection, collapsed-Gibbs LDA with UMass coherence,
//! and windowed segment matching between video pairs. File formats, ingest and
//! the command line live in the `mediabar` crate.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod barcode;
pub mod cluster;
pub mod dsp;
mod error;
pub mod media;
pub mod num;
pub mod repurpose;
pub mod rng;
pub mod text;
pub mod topics;

pub use error::{Error, Result};
pub use media::{AudioClip, FrameImage, Rgb};
