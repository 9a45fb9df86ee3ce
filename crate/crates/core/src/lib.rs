//! Core of the railway LiDAR annotation toolkit.
//!
//! Everything here is pure computation over in-memory buffers and builds
//! without `std` (only `alloc`):
//!
//! - [`cloud`], [`label`], [`prediction`]: scan data and their binary codecs
//! - [`preprocess`]: reflection and outlier filtering, camera/LiDAR time
//!   pairing, per-point motion correction
//! - [`transfer`]: pinhole projection, 2D to 3D label transfer, human
//!   corrections
//! - [`active`]: entropy/uncertainty scan scoring and rank-sum selection
//! - [`metrics`]: confusion matrix, IoU, mIoU and fwIoU
//! - [`synth`]: a seeded synthetic railway scene with ground truth, used as a
//!   test oracle
//!
//! File IO, the dataset manifest, the CLI and the HTTP service live in the
//! `railseg` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod active;
pub mod class;
pub mod cloud;
mod error;
pub(crate) mod geom;
pub mod label;
pub mod metrics;
pub mod prediction;
pub mod preprocess;
pub mod synth;
pub mod transfer;

pub use class::{ClassId, ClassInfo, ClassSet, N_CLASSES};
pub use cloud::{Point, PointCloud};
pub use error::{Error, Result};
pub use label::{LabelArray, PointLabel, Provenance};
pub use prediction::PredictionMatrix;
