//! The dataset manifest: one JSON document listing every scan and image,
//! the calibration, the image class map, the status of each scan and the
//! history of active-learning rounds.
//!
//! Paths inside the manifest are relative to the dataset root (the directory
//! holding the manifest file).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Component, Path, PathBuf};

use railseg_core::active::SelectionResult;
use railseg_core::preprocess::SyncPair;
use railseg_core::transfer::{CameraCalibration, ClassMap};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ScanStatus {
    Raw,
    Coarse,
    PendingAnnotation,
    Corrected,
    /// Held-out evaluation scan. Assigned at registration and never changed.
    Test,
}

impl ScanStatus {
    pub fn can_move_to(self, to: ScanStatus) -> bool {
        use ScanStatus::*;
        matches!((self, to), (Raw, Coarse) | (Coarse, PendingAnnotation) | (PendingAnnotation, Corrected))
    }
}

impl fmt::Display for ScanStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ScanStatus::Raw => "RAW",
            ScanStatus::Coarse => "COARSE",
            ScanStatus::PendingAnnotation => "PENDING_ANNOTATION",
            ScanStatus::Corrected => "CORRECTED",
            ScanStatus::Test => "TEST",
        };
        f.write_str(s)
    }
}

fn forward() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub scan_id: String,
    /// Cloud as recorded.
    pub raw_cloud: PathBuf,
    /// Cloud after the preprocessing steps applied so far.
    pub cloud: PathBuf,
    pub t_scan: f64,
    /// Train speed at scan start, m/s.
    pub v_current: f64,
    #[serde(default = "forward")]
    pub travel_dir: [f64; 3],
    pub status: ScanStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_id: Option<String>,
    /// Maps `raw_cloud` indices to `cloud` indices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<PathBuf>,
    #[serde(default)]
    pub motion_corrected: bool,
    /// Output of label transfer, before any human correction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coarse_labels: Option<PathBuf>,
    /// Current labels: the coarse labels with all corrections applied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictions: Option<PathBuf>,
    /// Append-only JSON-lines log of every correction received.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrections: Option<PathBuf>,
}

impl ScanEntry {
    pub fn new(scan_id: impl Into<String>, cloud: impl Into<PathBuf>, t_scan: f64, v_current: f64, status: ScanStatus) -> Self {
        let cloud = cloud.into();
        ScanEntry {
            scan_id: scan_id.into(),
            raw_cloud: cloud.clone(),
            cloud,
            t_scan,
            v_current,
            travel_dir: forward(),
            status,
            image_id: None,
            mask: None,
            motion_corrected: false,
            coarse_labels: None,
            labels: None,
            predictions: None,
            corrections: None,
        }
    }

    fn paths(&self) -> impl Iterator<Item = &PathBuf> {
        [&self.raw_cloud, &self.cloud]
            .into_iter()
            .chain(self.mask.iter())
            .chain(self.coarse_labels.iter())
            .chain(self.labels.iter())
            .chain(self.predictions.iter())
            .chain(self.corrections.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageEntry {
    pub image_id: String,
    /// Label image (PGM, raw values translated through the class map).
    pub path: PathBuf,
    pub t_image: f64,
}

/// One status change. `from` is absent when the scan was registered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub seq: u64,
    /// Seconds since the epoch.
    pub at: f64,
    pub scan_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<ScanStatus>,
    pub to: ScanStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    pub scans: Vec<ScanEntry>,
    #[serde(default)]
    pub images: Vec<ImageEntry>,
    #[serde(default)]
    pub sync_pairs: Vec<SyncPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CameraCalibration>,
    #[serde(default = "ClassMap::identity")]
    pub class_map: ClassMap,
    #[serde(default)]
    pub al_iterations: Vec<SelectionResult>,
    #[serde(default)]
    pub transitions: Vec<Transition>,
    /// Latest evaluation report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics_report: Option<PathBuf>,
}

impl Default for DatasetManifest {
    fn default() -> Self {
        DatasetManifest {
            version: MANIFEST_VERSION,
            scans: Vec::new(),
            images: Vec::new(),
            sync_pairs: Vec::new(),
            calibration: None,
            class_map: ClassMap::identity(),
            al_iterations: Vec::new(),
            transitions: Vec::new(),
            metrics_report: None,
        }
    }
}

pub(crate) fn now() -> f64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn check_relative(path: &Path) -> Result<()> {
    let ok = path
        .components()
        .all(|c| matches!(c, Component::Normal(_) | Component::CurDir));
    if ok && !path.as_os_str().is_empty() {
        Ok(())
    } else {
        Err(Error::Manifest(format!(
            "path `{}` must be relative to the dataset root and stay inside it",
            path.display()
        )))
    }
}

/// Current status of every scan according to a transition log.
pub fn replay(transitions: &[Transition]) -> Result<BTreeMap<String, ScanStatus>> {
    let mut state = BTreeMap::new();
    for t in transitions {
        let current = state.get(&t.scan_id).copied();
        match (current, t.from) {
            (None, None) => {}
            (Some(cur), Some(from)) if cur == from && from.can_move_to(t.to) => {}
            _ => {
                return Err(Error::Manifest(format!(
                    "transition {} of scan `{}` does not follow its history",
                    t.seq, t.scan_id
                )))
            }
        }
        state.insert(t.scan_id.clone(), t.to);
    }
    Ok(state)
}

impl DatasetManifest {
    pub fn scan(&self, scan_id: &str) -> Result<&ScanEntry> {
        self.scans
            .iter()
            .find(|s| s.scan_id == scan_id)
            .ok_or_else(|| Error::UnknownScan(scan_id.into()))
    }

    pub fn scan_mut(&mut self, scan_id: &str) -> Result<&mut ScanEntry> {
        self.scans
            .iter_mut()
            .find(|s| s.scan_id == scan_id)
            .ok_or_else(|| Error::UnknownScan(scan_id.into()))
    }

    pub fn image(&self, image_id: &str) -> Option<&ImageEntry> {
        self.images.iter().find(|i| i.image_id == image_id)
    }

    fn next_seq(&self) -> u64 {
        self.transitions.last().map_or(0, |t| t.seq + 1)
    }

    /// Adds a scan and logs its initial status.
    pub fn register_scan(&mut self, entry: ScanEntry) -> Result<()> {
        if self.scans.iter().any(|s| s.scan_id == entry.scan_id) {
            return Err(Error::Manifest(format!("duplicate scan id `{}`", entry.scan_id)));
        }
        self.transitions.push(Transition {
            seq: self.next_seq(),
            at: now(),
            scan_id: entry.scan_id.clone(),
            from: None,
            to: entry.status,
        });
        self.scans.push(entry);
        Ok(())
    }

    /// Moves a scan along RAW -> COARSE -> PENDING_ANNOTATION -> CORRECTED.
    pub fn set_status(&mut self, scan_id: &str, to: ScanStatus) -> Result<()> {
        let seq = self.next_seq();
        let scan = self.scan_mut(scan_id)?;
        if !scan.status.can_move_to(to) {
            return Err(Error::Transition {
                scan_id: scan_id.into(),
                from: scan.status.to_string(),
                to: to.to_string(),
            });
        }
        let from = scan.status;
        scan.status = to;
        self.transitions.push(Transition {
            seq,
            at: now(),
            scan_id: scan_id.into(),
            from: Some(from),
            to,
        });
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != MANIFEST_VERSION {
            return Err(Error::Manifest(format!("unsupported version {}", self.version)));
        }
        let mut ids = BTreeSet::new();
        for s in &self.scans {
            if !ids.insert(s.scan_id.as_str()) {
                return Err(Error::Manifest(format!("duplicate scan id `{}`", s.scan_id)));
            }
            if !(s.t_scan.is_finite() && s.v_current.is_finite()) {
                return Err(Error::Manifest(format!("scan `{}` has non-finite timing or speed", s.scan_id)));
            }
            for p in s.paths() {
                check_relative(p)?;
            }
            if let Some(img) = &s.image_id {
                if self.image(img).is_none() {
                    return Err(Error::Manifest(format!("scan `{}` refers to unknown image `{img}`", s.scan_id)));
                }
            }
        }
        let mut image_ids = BTreeSet::new();
        for i in &self.images {
            if !image_ids.insert(i.image_id.as_str()) {
                return Err(Error::Manifest(format!("duplicate image id `{}`", i.image_id)));
            }
            check_relative(&i.path)?;
        }
        if let Some(c) = &self.calibration {
            c.validate()?;
        }
        if let Some(p) = &self.metrics_report {
            check_relative(p)?;
        }
        let test: BTreeSet<&str> = self
            .scans
            .iter()
            .filter(|s| s.status == ScanStatus::Test)
            .map(|s| s.scan_id.as_str())
            .collect();
        for round in &self.al_iterations {
            for r in &round.ranked {
                if test.contains(r.scan_id.as_str()) {
                    return Err(Error::Manifest(format!(
                        "TEST scan `{}` appears in selection round {}",
                        r.scan_id, round.iteration
                    )));
                }
            }
        }
        let replayed = replay(&self.transitions)?;
        let current: BTreeMap<String, ScanStatus> = self.scans.iter().map(|s| (s.scan_id.clone(), s.status)).collect();
        if replayed != current {
            return Err(Error::Manifest("scan statuses disagree with the transition log".into()));
        }
        Ok(())
    }
}
