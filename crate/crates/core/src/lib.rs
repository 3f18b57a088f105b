//! Core algorithms for mental-rotation stimulus generation and representation probing.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the dataset
//! writer and the command line live in the `mentrot` crate.
//!
//! - [`geomgen`]: Shepard-Metzler polycubes, the cube rotation group, chirality.
//! - [`render`]: deterministic CPU rasterizer and two-view pose sampling.
//! - [`textgen`]: glyph atlases and rotated/mirrored text pairs.
//! - [`scenespec`]: tabletop scene specifications for an external renderer.
//! - [`dataset`]: balanced pair planning for the seven dataset variants.
//! - [`embed`]: embedding matrices and train-split standardization.
//! - [`probe`]: the Siamese probe, AdamW, schedule and cross-validation.
//! - [`analysis`]: PCA, rotation trajectories and layer curves.
//! - [`synthetic`]: embedding sets with known structure.
#![no_std]

extern crate alloc;

pub mod analysis;
pub mod dataset;
pub mod embed;
pub mod geomgen;
pub mod image;
pub mod probe;
pub mod real;
pub mod render;
pub mod rng;
pub mod scenespec;
pub mod synthetic;
pub mod textgen;

/// Toolkit version echoed into every artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
