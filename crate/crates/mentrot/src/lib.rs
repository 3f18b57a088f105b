//! File formats, dataset directories and the command line around
//! `mentrot-core`.
//!
//! - [`mreb`]: per-layer embedding files.
//! - [`images`], [`atlas`]: PNG views and glyph atlas sheets.
//! - [`manifest`]: building and verifying dataset directories.
//! - [`config`]: TOML/JSON run configuration and its hash.
//! - [`report`]: probe runs over embedding files.
//! - [`analyze`]: curves, PCA plots, pooling comparisons.

pub mod analyze;
pub mod atlas;
pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod images;
pub mod manifest;
pub mod mreb;
pub mod report;

pub use error::{Error, Result};
