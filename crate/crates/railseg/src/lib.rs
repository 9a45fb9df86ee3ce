//! Dataset storage and the annotation service for railway LiDAR.
//!
//! Builds on `railseg-core` with everything that needs the standard library:
//! file formats on disk, the JSON dataset manifest, dataset-level pipeline
//! steps, evaluation reports and the HTTP annotation service. The `railseg`
//! binary exposes the pipeline as subcommands.

pub mod dataset;
mod error;
pub mod io;
pub mod manifest;
pub mod ops;
pub mod palette;
pub mod report;
pub mod service;

pub use dataset::{AccessRecord, Dataset, Purpose};
pub use error::{Error, ErrorReport, Result};
pub use manifest::{DatasetManifest, ScanEntry, ScanStatus};
