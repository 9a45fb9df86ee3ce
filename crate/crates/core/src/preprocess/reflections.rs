use alloc::vec::Vec;

use crate::{Error, PointCloud, Result};

/// Drops returns closer than `min_range` to the sensor origin, which is where
/// the protective housing reflects the beams. The bound is closed: a point at
/// exactly `min_range` is kept.
pub fn filter_reflections(cloud: &PointCloud, min_range: f64) -> Result<(PointCloud, Vec<bool>)> {
    if !(min_range > 0.0 && min_range.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "min_range",
            reason: "must be positive and finite",
        });
    }
    let keep: Vec<bool> = cloud.points.iter().map(|p| p.range() >= min_range).collect();
    let filtered = cloud.select(&keep)?;
    Ok((filtered, keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Point;
    use alloc::vec;

    fn cloud(points: Vec<Point>) -> PointCloud {
        PointCloud::new("s", 0.0, points)
    }

    #[test]
    fn below_threshold_removed() {
        let c = cloud(vec![Point::new(0.3, 0.0, 0.0, 0.5, 0.0), Point::new(5.0, 1.0, 0.0, 0.5, 0.0)]);
        let (out, keep) = filter_reflections(&c, 1.5).unwrap();
        assert_eq!(keep, vec![false, true]);
        assert_eq!(out.len(), 1);
        assert_eq!(out.points[0].x, 5.0);
    }

    #[test]
    fn boundary_is_kept() {
        let c = cloud(vec![Point::new(1.5, 0.0, 0.0, 0.5, 0.0), Point::new(0.0, -1.5, 0.0, 0.5, 0.0)]);
        let (out, _) = filter_reflections(&c, 1.5).unwrap();
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn nonpositive_range_rejected() {
        assert!(filter_reflections(&cloud(vec![]), 0.0).is_err());
        assert!(filter_reflections(&cloud(vec![]), f64::NAN).is_err());
    }

    #[test]
    fn everything_filtered_is_empty() {
        let c = cloud(vec![Point::new(0.1, 0.0, 0.0, 0.5, 0.0)]);
        let (out, keep) = filter_reflections(&c, 1.5).unwrap();
        assert!(out.is_empty());
        assert_eq!(keep, vec![false]);
    }
}
