//! Segmentation quality scores derived from a confusion matrix.
//!
//! Points whose ground truth is `UNLABELED` are ignored. A prediction of
//! `UNLABELED` on a labeled point lands in a reject column: it is a false
//! negative for the true class and a false positive for no class.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{ClassId, Error, LabelArray, Result, N_CLASSES};

const REJECT: usize = N_CLASSES;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    /// `counts[gt][pred]`, both zero-based class indices; column
    /// `N_CLASSES` holds `UNLABELED` predictions.
    counts: [[u64; N_CLASSES + 1]; N_CLASSES],
}

impl ConfusionMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, gt: ClassId, pred: ClassId) -> u64 {
        match (gt.index(), pred) {
            (Some(g), ClassId::UNLABELED) => self.counts[g][REJECT],
            (Some(g), p) => p.index().map_or(0, |p| self.counts[g][p]),
            _ => 0,
        }
    }

    pub fn rows(&self) -> &[[u64; N_CLASSES + 1]; N_CLASSES] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn accumulate(&mut self, pred: &[ClassId], gt: &[ClassId]) -> Result<()> {
        if pred.len() != gt.len() {
            return Err(Error::LengthMismatch {
                expected: gt.len(),
                found: pred.len(),
            });
        }
        for (index, (&p, &g)) in pred.iter().zip(gt).enumerate() {
            for c in [p, g] {
                if !c.is_point_label() {
                    return Err(Error::UnknownClass { index, id: c.0 as u32 });
                }
            }
        }
        for (&p, &g) in pred.iter().zip(gt) {
            if let Some(gi) = g.index() {
                self.counts[gi][p.index().unwrap_or(REJECT)] += 1;
            }
        }
        Ok(())
    }

    pub fn accumulate_labels(&mut self, pred: &LabelArray, gt: &LabelArray) -> Result<()> {
        let p: Vec<ClassId> = pred.classes().collect();
        let g: Vec<ClassId> = gt.classes().collect();
        self.accumulate(&p, &g)
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (a, b) in self.counts.iter_mut().flatten().zip(other.counts.iter().flatten()) {
            *a += b;
        }
    }

    /// Ground-truth point count per class.
    pub fn gt_counts(&self) -> [u64; N_CLASSES] {
        let mut out = [0; N_CLASSES];
        for (o, row) in out.iter_mut().zip(&self.counts) {
            *o = row.iter().sum();
        }
        out
    }

    /// `TP / (TP + FP + FN)` per class; `None` when the class occurs in
    /// neither ground truth nor prediction.
    pub fn iou_per_class(&self) -> [Option<f64>; N_CLASSES] {
        let mut out = [None; N_CLASSES];
        for (c, o) in out.iter_mut().enumerate() {
            let tp = self.counts[c][c];
            let fn_: u64 = self.counts[c].iter().sum::<u64>() - tp;
            let fp: u64 = (0..N_CLASSES).filter(|&g| g != c).map(|g| self.counts[g][c]).sum();
            let union = tp + fp + fn_;
            if union > 0 {
                *o = Some(tp as f64 / union as f64);
            }
        }
        out
    }

    pub fn report(&self, scans_evaluated: usize) -> Result<IoUReport> {
        let counts = self.gt_counts();
        let total: u64 = counts.iter().sum();
        let ious = self.iou_per_class();
        let per_class: Vec<ClassIou> = ClassId::all_3d()
            .zip(ious)
            .zip(counts)
            .map(|((class, iou), n)| ClassIou {
                class,
                iou,
                gt_frequency: if total > 0 { n as f64 / total as f64 } else { 0.0 },
            })
            .collect();
        Ok(IoUReport {
            miou: miou(&per_class)?,
            fwiou: fwiou(&per_class)?,
            per_class,
            scans_evaluated,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassIou {
    pub class: ClassId,
    pub iou: Option<f64>,
    /// Share of ground-truth points belonging to the class; zero means the
    /// class is absent from the ground truth.
    pub gt_frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IoUReport {
    pub per_class: Vec<ClassIou>,
    pub miou: f64,
    pub fwiou: f64,
    pub scans_evaluated: usize,
}

fn present(rows: &[ClassIou]) -> impl Iterator<Item = &ClassIou> {
    rows.iter().filter(|r| r.gt_frequency > 0.0)
}

/// Unweighted mean IoU over the classes present in the ground truth.
pub fn miou(rows: &[ClassIou]) -> Result<f64> {
    let (sum, n) = present(rows).fold((0.0, 0usize), |(s, n), r| (s + r.iou.unwrap_or(0.0), n + 1));
    if n == 0 {
        return Err(Error::NoClassPresent);
    }
    Ok(sum / n as f64)
}

/// IoU weighted by ground-truth frequency over the present classes. Weights
/// are renormalized, so they need not sum to exactly one.
pub fn fwiou(rows: &[ClassIou]) -> Result<f64> {
    let (num, den) = present(rows).fold((0.0, 0.0), |(num, den), r| {
        (num + r.gt_frequency * r.iou.unwrap_or(0.0), den + r.gt_frequency)
    });
    if den <= 0.0 {
        return Err(Error::NoClassPresent);
    }
    Ok(num / den)
}

/// Relative change from `old` to `new` in percent.
pub fn improvement(old: f64, new: f64) -> Result<f64> {
    if !(old > 0.0) {
        return Err(Error::InvalidParameter {
            name: "old",
            reason: "baseline score must be positive",
        });
    }
    Ok((new - old) / old * 100.0)
}
