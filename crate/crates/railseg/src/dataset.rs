use std::fs::{self, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use railseg_core::LabelArray;
use serde::{Deserialize, Serialize};

use crate::manifest::{DatasetManifest, ScanStatus};
use crate::{io, Error, Result};

/// Why label data is being read. Only [`Purpose::Evaluation`] may touch the
/// labels of TEST scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    Annotation,
    Selection,
    Evaluation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessRecord {
    pub scan_id: String,
    pub status: ScanStatus,
    pub purpose: Purpose,
    pub granted: bool,
}

/// Exclusive claim on a manifest, held as `<manifest>.lock` for the lifetime
/// of the value.
#[derive(Debug)]
struct ManifestLock {
    path: PathBuf,
}

impl ManifestLock {
    fn acquire(manifest: &Path) -> Result<Self> {
        let mut name = manifest.as_os_str().to_owned();
        name.push(".lock");
        let path = PathBuf::from(name);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(ManifestLock { path })
            }
            Err(e) if e.kind() == ErrorKind::AlreadyExists => Err(Error::Locked(path)),
            Err(e) => Err(Error::io(&path, e)),
        }
    }
}

impl Drop for ManifestLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// An opened dataset: the manifest, its root directory and the lock that
/// makes this value the manifest's single writer.
#[derive(Debug)]
pub struct Dataset {
    root: PathBuf,
    manifest_path: PathBuf,
    pub manifest: DatasetManifest,
    audit: Mutex<Vec<AccessRecord>>,
    _lock: ManifestLock,
}

impl Dataset {
    pub fn open(manifest_path: impl AsRef<Path>) -> Result<Self> {
        let manifest_path = manifest_path.as_ref().to_path_buf();
        let lock = ManifestLock::acquire(&manifest_path)?;
        let manifest: DatasetManifest = io::load_json(&manifest_path)?;
        manifest.validate()?;
        Ok(Self::assemble(manifest_path, manifest, lock))
    }

    /// Writes a new manifest, refusing to overwrite an existing one.
    pub fn create(manifest_path: impl AsRef<Path>, manifest: DatasetManifest) -> Result<Self> {
        let manifest_path = manifest_path.as_ref().to_path_buf();
        if let Some(dir) = manifest_path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let lock = ManifestLock::acquire(&manifest_path)?;
        if manifest_path.exists() {
            return Err(Error::Manifest(format!("{} already exists", manifest_path.display())));
        }
        manifest.validate()?;
        let ds = Self::assemble(manifest_path, manifest, lock);
        ds.save()?;
        Ok(ds)
    }

    fn assemble(manifest_path: PathBuf, manifest: DatasetManifest, lock: ManifestLock) -> Self {
        let root = manifest_path
            .parent()
            .filter(|d| !d.as_os_str().is_empty())
            .map_or_else(|| PathBuf::from("."), Path::to_path_buf);
        Dataset {
            root,
            manifest_path,
            manifest,
            audit: Mutex::new(Vec::new()),
            _lock: lock,
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest_path(&self) -> &Path {
        &self.manifest_path
    }

    /// Absolute location of a manifest-relative path.
    pub fn path(&self, rel: &Path) -> PathBuf {
        self.root.join(rel)
    }

    /// Validates and atomically replaces the manifest file.
    pub fn save(&self) -> Result<()> {
        self.manifest.validate()?;
        io::save_json(&self.manifest, &self.manifest_path)
    }

    /// Gatekeeper for label reads; every call is recorded.
    pub fn check_label_access(&self, scan_id: &str, purpose: Purpose) -> Result<()> {
        let status = self.manifest.scan(scan_id)?.status;
        let granted = status != ScanStatus::Test || purpose == Purpose::Evaluation;
        self.audit.lock().unwrap_or_else(|p| p.into_inner()).push(AccessRecord {
            scan_id: scan_id.into(),
            status,
            purpose,
            granted,
        });
        if granted {
            Ok(())
        } else {
            Err(Error::TestIsolation(scan_id.into()))
        }
    }

    /// Current labels of a scan, checked against its cloud length when the
    /// cloud has been read before (`expected_len`).
    pub fn read_labels(&self, scan_id: &str, purpose: Purpose, expected_len: Option<usize>) -> Result<LabelArray> {
        self.check_label_access(scan_id, purpose)?;
        let scan = self.manifest.scan(scan_id)?;
        let rel = scan.labels.as_ref().ok_or_else(|| Error::Missing {
            scan_id: scan_id.into(),
            what: "labels",
        })?;
        io::load_labels(&self.path(rel), scan_id, expected_len)
    }

    /// Reads a label file that lives outside the manifest (for example a
    /// ground-truth directory), still subject to the access check.
    pub fn read_label_file(&self, scan_id: &str, path: &Path, purpose: Purpose) -> Result<LabelArray> {
        self.check_label_access(scan_id, purpose)?;
        io::load_labels(path, scan_id, None)
    }

    pub fn audit_log(&self) -> Vec<AccessRecord> {
        self.audit.lock().unwrap_or_else(|p| p.into_inner()).clone()
    }
}
