use serde::{Deserialize, Serialize};

use crate::geom::{add, norm, scale, sub, Vec3};
use crate::{Error, PointCloud, Result};

/// Sanity bound on train speed, m/s (216 km/h).
pub const MAX_SPEED: f64 = 60.0;

/// Straight-line ego motion during one sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionParams {
    speed: f64,
    travel_dir: Vec3,
}

impl MotionParams {
    pub fn new(speed: f64, travel_dir: Vec3) -> Result<Self> {
        if !(0.0..=MAX_SPEED).contains(&speed) {
            return Err(Error::InvalidParameter {
                name: "v_current",
                reason: "must lie in [0, 60] m/s",
            });
        }
        if !travel_dir.iter().all(|v| v.is_finite()) || (norm(travel_dir) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter {
                name: "travel_dir",
                reason: "must be a unit vector",
            });
        }
        Ok(MotionParams { speed, travel_dir })
    }

    /// Motion along the sensor's +x axis.
    pub fn forward(speed: f64) -> Result<Self> {
        Self::new(speed, [1.0, 0.0, 0.0])
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn travel_dir(&self) -> Vec3 {
        self.travel_dir
    }

    /// Same speed in the opposite direction, i.e. the correction with `-v`.
    pub fn reversed(&self) -> Self {
        MotionParams {
            speed: self.speed,
            travel_dir: scale(self.travel_dir, -1.0),
        }
    }

    pub(crate) fn offset(&self, t_rel: f64) -> Vec3 {
        scale(self.travel_dir, t_rel * self.speed)
    }
}

/// Removes motion distortion: each point moves forward by the distance the
/// sensor travelled between scan start and the point's capture,
/// `t_rel * v_current`, so the whole sweep is expressed in the scan-start
/// pose. Count, order, intensity and `t_rel` are unchanged.
pub fn motion_correct(cloud: &PointCloud, params: &MotionParams) -> PointCloud {
    let mut out = cloud.clone();
    for p in &mut out.points {
        p.set_position(add(p.position(), params.offset(p.t_rel)));
    }
    out
}

/// Inverse of [`motion_correct`]: what a moving sensor records for a static
/// scene given in the scan-start pose.
pub fn apply_motion_distortion(cloud: &PointCloud, params: &MotionParams) -> PointCloud {
    let mut out = cloud.clone();
    for p in &mut out.points {
        p.set_position(sub(p.position(), params.offset(p.t_rel)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Point;
    use alloc::vec;

    #[test]
    fn hundred_kph_over_hundred_ms() {
        let cloud = PointCloud::new("s", 0.0, vec![Point::new(10.0, 1.0, -2.0, 0.3, 0.1)]);
        let out = motion_correct(&cloud, &MotionParams::forward(27.78).unwrap());
        assert!((out.points[0].x - 12.778).abs() < 1e-12);
        assert_eq!(out.points[0].y, 1.0);
        assert_eq!(out.points[0].z, -2.0);
        assert_eq!(out.points[0].t_rel, 0.1);
    }

    #[test]
    fn zero_speed_is_identity() {
        let cloud = PointCloud::new(
            "s",
            0.0,
            vec![Point::new(1.0, 2.0, 3.0, 0.4, 0.2), Point::new(-4.0, 0.5, 1.0, 0.1, 0.05)],
        );
        assert_eq!(motion_correct(&cloud, &MotionParams::forward(0.0).unwrap()), cloud);
    }

    #[test]
    fn arbitrary_direction() {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let params = MotionParams::new(10.0, [s, s, 0.0]).unwrap();
        let cloud = PointCloud::new("s", 0.0, vec![Point::new(0.0, 0.0, 0.0, 0.0, 0.2)]);
        let out = motion_correct(&cloud, &params);
        assert!((out.points[0].x - 2.0 * s).abs() < 1e-12);
        assert!((out.points[0].y - 2.0 * s).abs() < 1e-12);
    }

    #[test]
    fn invalid_params() {
        assert!(MotionParams::forward(-1.0).is_err());
        assert!(MotionParams::forward(61.0).is_err());
        assert!(MotionParams::new(5.0, [1.0, 1.0, 0.0]).is_err());
        assert!(MotionParams::new(5.0, [f64::NAN, 0.0, 0.0]).is_err());
    }
}
