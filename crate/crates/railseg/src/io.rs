//! Files on disk: point clouds, labels, predictions, label images, keep
//! masks and JSON documents.
//!
//! Every writer goes through [`write_atomic`], so readers never observe a
//! partially written file.

use std::fs;
use std::io::Write;
use std::path::Path;

use railseg_core::transfer::{ClassMap, LabelImage};
use railseg_core::{LabelArray, PointCloud, PredictionMatrix};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{Error, Result};

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Writes through a temporary file in the target directory, syncs it and
/// renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn load_cloud(path: &Path, scan_id: &str, t_scan: f64) -> Result<PointCloud> {
    PointCloud::decode(scan_id, t_scan, &read_bytes(path)?).map_err(|e| Error::format(path, e))
}

pub fn save_cloud(cloud: &PointCloud, path: &Path) -> Result<()> {
    write_atomic(path, &cloud.encode().map_err(|e| Error::format(path, e))?)
}

/// `expected_len` is the point count of the cloud the labels belong to.
pub fn load_labels(path: &Path, scan_id: &str, expected_len: Option<usize>) -> Result<LabelArray> {
    LabelArray::decode(scan_id, &read_bytes(path)?, expected_len).map_err(|e| Error::format(path, e))
}

pub fn save_labels(labels: &LabelArray, path: &Path) -> Result<()> {
    write_atomic(path, &labels.encode().map_err(|e| Error::format(path, e))?)
}

pub fn load_predictions(path: &Path, scan_id: &str) -> Result<PredictionMatrix> {
    PredictionMatrix::decode(scan_id, &read_bytes(path)?).map_err(|e| Error::format(path, e))
}

pub fn save_predictions(pred: &PredictionMatrix, path: &Path) -> Result<()> {
    write_atomic(path, &pred.encode())
}

pub fn load_label_image(path: &Path, map: &ClassMap) -> Result<LabelImage> {
    LabelImage::from_pgm(&read_bytes(path)?, map).map_err(|e| Error::format(path, e))
}

pub fn save_label_image(image: &LabelImage, path: &Path) -> Result<()> {
    write_atomic(path, &image.to_pgm())
}

/// Keep masks are stored as one byte (0 or 1) per original point.
pub fn load_mask(path: &Path) -> Result<Vec<bool>> {
    read_bytes(path)?
        .into_iter()
        .map(|b| match b {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(Error::Invalid(format!("{}: mask bytes must be 0 or 1", path.display()))),
        })
        .collect()
}

pub fn save_mask(mask: &[bool], path: &Path) -> Result<()> {
    let bytes: Vec<u8> = mask.iter().map(|&k| k as u8).collect();
    write_atomic(path, &bytes)
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })
}

pub fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}
