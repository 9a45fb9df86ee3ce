use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{ClassId, Error, LabelArray, PointLabel, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correction {
    pub point_index: usize,
    pub new_class_id: ClassId,
    #[serde(default)]
    pub author: String,
    /// Seconds since the epoch.
    pub timestamp: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CorrectionSet {
    pub scan_id: String,
    pub entries: Vec<Correction>,
}

impl CorrectionSet {
    pub fn new(scan_id: impl Into<String>) -> Self {
        CorrectionSet {
            scan_id: scan_id.into(),
            entries: Vec::new(),
        }
    }

    pub fn validate(&self, n_points: usize) -> Result<()> {
        for c in &self.entries {
            if c.point_index >= n_points {
                return Err(Error::IndexOutOfRange {
                    index: c.point_index,
                    len: n_points,
                });
            }
            if !c.new_class_id.is_point_label() {
                return Err(Error::UnknownClass {
                    index: c.point_index,
                    id: c.new_class_id.0 as u32,
                });
            }
            if !c.timestamp.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "timestamp",
                    reason: "must be finite",
                });
            }
        }
        Ok(())
    }

    /// One entry per point: the latest timestamp wins, equal timestamps are
    /// resolved by position in the list (later wins). Sorted by point index.
    pub fn resolve(&self) -> Vec<Correction> {
        let mut latest: BTreeMap<usize, &Correction> = BTreeMap::new();
        for c in &self.entries {
            match latest.get(&c.point_index) {
                Some(prev) if prev.timestamp > c.timestamp => {}
                _ => {
                    latest.insert(c.point_index, c);
                }
            }
        }
        latest.into_values().cloned().collect()
    }

    /// Appends another batch for the same scan.
    pub fn extend(&mut self, other: CorrectionSet) {
        self.entries.extend(other.entries);
    }
}

/// Applies human corrections: each touched point takes its resolved class
/// with provenance `Corrected`; every other point is left as is.
pub fn apply_corrections(labels: &LabelArray, corrections: &CorrectionSet) -> Result<LabelArray> {
    corrections.validate(labels.len())?;
    let mut out = labels.clone();
    for c in corrections.resolve() {
        out.labels[c.point_index] = PointLabel::corrected(c.new_class_id);
    }
    Ok(out)
}
