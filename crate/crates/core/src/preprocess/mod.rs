//! Raw scan cleanup before labeling. Covers reflection and outlier
//! filtering as well as camera pairing and motion-distortion correction.
//!
//! Filters return the reduced cloud together with a keep mask over the input
//! so that labels or predictions recorded against the original indices can
//! be re-aligned with [`compose_masks`] and `select`.

use alloc::vec::Vec;

use crate::{Error, Result};

mod kdtree;
mod motion;
mod outliers;
mod reflections;
mod sync;

pub use kdtree::KdTree;
pub use motion::{apply_motion_distortion, motion_correct, MotionParams, MAX_SPEED};
pub use outliers::{knn_mean_distances, remove_outliers};
pub use reflections::filter_reflections;
pub use sync::{sync_pairs, SyncPair};

pub const DEFAULT_MIN_RANGE: f64 = 1.5;
pub const DEFAULT_KNN_K: usize = 8;
pub const DEFAULT_KNN_ALPHA: f64 = 2.0;
/// Maximum camera/LiDAR timestamp difference, seconds.
pub const DEFAULT_MAX_DT: f64 = 0.010;

/// Combines a mask over the original points with a mask over the survivors
/// of the first one into a single mask over the original points.
pub fn compose_masks(first: &[bool], second: &[bool]) -> Result<Vec<bool>> {
    let kept = first.iter().filter(|&&k| k).count();
    if kept != second.len() {
        return Err(Error::LengthMismatch {
            expected: kept,
            found: second.len(),
        });
    }
    let mut rest = second.iter();
    Ok(first
        .iter()
        .map(|&k| k && *rest.next().expect("length checked"))
        .collect())
}

/// Original indices of the points a mask keeps.
pub fn kept_indices(mask: &[bool]) -> Vec<usize> {
    mask.iter()
        .enumerate()
        .filter_map(|(i, &k)| k.then_some(i))
        .collect()
}
