use alloc::vec::Vec;

use super::KdTree;
use crate::geom::Vec3;
use crate::{Error, PointCloud, Result};

/// Mean Euclidean distance from every point to its `k` nearest neighbours.
pub fn knn_mean_distances(positions: &[Vec3], k: usize) -> Vec<f64> {
    let tree = KdTree::build(positions);
    (0..positions.len())
        .map(|i| {
            let nn = tree.nearest_excluding(i, k);
            nn.iter().map(|&(d2, _)| libm::sqrt(d2)).sum::<f64>() / k as f64
        })
        .collect()
}

/// Statistical outlier removal: point `i` is dropped iff its mean distance to
/// its `k` nearest neighbours exceeds `mean + alpha * std` of that statistic
/// over the whole cloud (population standard deviation, strict inequality).
///
/// An empty cloud passes through unchanged; otherwise the cloud must hold
/// more than `k` points.
pub fn remove_outliers(cloud: &PointCloud, k: usize, alpha: f64) -> Result<(PointCloud, Vec<bool>)> {
    if k == 0 {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: "must be at least 1",
        });
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: "must be positive and finite",
        });
    }
    if cloud.is_empty() {
        return Ok((cloud.clone(), Vec::new()));
    }
    if cloud.len() <= k {
        return Err(Error::TooFewPoints { n: cloud.len(), k });
    }
    let positions: Vec<Vec3> = cloud.points.iter().map(|p| p.position()).collect();
    let stat = knn_mean_distances(&positions, k);
    let n = stat.len() as f64;
    let mean = stat.iter().sum::<f64>() / n;
    let var = stat.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n;
    let threshold = mean + alpha * libm::sqrt(var);
    let keep: Vec<bool> = stat.iter().map(|&d| d <= threshold).collect();
    Ok((cloud.select(&keep)?, keep))
}
