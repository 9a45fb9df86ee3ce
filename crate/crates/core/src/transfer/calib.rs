use serde::{Deserialize, Serialize};

use crate::geom::{det, mat_mul, mat_vec, transpose, Mat3, Vec3};
use crate::{Error, PointCloud, Result};

/// Points closer than this to the camera plane do not project.
pub const Z_MIN: f64 = 0.1;

pub const DEFAULT_WIDTH: u32 = 2048;
pub const DEFAULT_HEIGHT: u32 = 1536;

/// Pinhole intrinsics plus the rigid LiDAR to camera transform
/// `p_cam = rotation * p_lidar + translation`. No lens distortion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraCalibration {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// Row-major.
    pub rotation: Mat3,
    pub translation: Vec3,
    #[serde(default = "default_width")]
    pub width: u32,
    #[serde(default = "default_height")]
    pub height: u32,
}

fn default_width() -> u32 {
    DEFAULT_WIDTH
}

fn default_height() -> u32 {
    DEFAULT_HEIGHT
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pixel {
    pub u: f64,
    pub v: f64,
}

impl CameraCalibration {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.fx, self.fy, self.cx, self.cy]
            .iter()
            .chain(self.rotation.iter().flatten())
            .chain(self.translation.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidCalibration("non-finite parameter"));
        }
        if self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(Error::InvalidCalibration("focal lengths must be positive"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidCalibration("image dimensions must be nonzero"));
        }
        if !(0.0..self.width as f64).contains(&self.cx) || !(0.0..self.height as f64).contains(&self.cy) {
            return Err(Error::InvalidCalibration("principal point outside the image"));
        }
        let rtr = mat_mul(&transpose(&self.rotation), &self.rotation);
        for (r, row) in rtr.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                let expect = if r == c { 1.0 } else { 0.0 };
                if (v - expect).abs() > 1e-9 {
                    return Err(Error::InvalidCalibration("rotation is not orthonormal"));
                }
            }
        }
        if (det(&self.rotation) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidCalibration("rotation determinant is not +1"));
        }
        Ok(())
    }

    pub fn to_camera(&self, p: Vec3) -> Vec3 {
        let r = mat_vec(&self.rotation, p);
        [r[0] + self.translation[0], r[1] + self.translation[1], r[2] + self.translation[2]]
    }

    /// Camera center expressed in the LiDAR frame.
    pub fn camera_origin(&self) -> Vec3 {
        let rt = transpose(&self.rotation);
        let o = mat_vec(&rt, self.translation);
        [-o[0], -o[1], -o[2]]
    }

    /// LiDAR-frame direction of the ray through pixel coordinates `(u, v)`.
    pub fn pixel_ray(&self, u: f64, v: f64) -> Vec3 {
        let d = [(u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0];
        mat_vec(&transpose(&self.rotation), d)
    }

    /// Projection of one LiDAR-frame point, `None` when it lies behind
    /// `Z_MIN` or outside `[0, width) x [0, height)`.
    pub fn project(&self, p: Vec3) -> Option<Pixel> {
        let c = self.to_camera(p);
        if c[2] <= Z_MIN {
            return None;
        }
        let u = self.fx * c[0] / c[2] + self.cx;
        let v = self.fy * c[1] / c[2] + self.cy;
        let inside = (0.0..self.width as f64).contains(&u) && (0.0..self.height as f64).contains(&v);
        inside.then_some(Pixel { u, v })
    }
}

/// Per-point pixel coordinates; `None` marks points without a valid pixel.
pub fn project_points(cloud: &PointCloud, calib: &CameraCalibration) -> alloc::vec::Vec<Option<Pixel>> {
    cloud.points.iter().map(|p| calib.project(p.position())).collect()
}

#[cfg(test)]
pub(crate) fn test_calibration() -> CameraCalibration {
    // camera looking along LiDAR +x: x_cam = -y, y_cam = -z, z_cam = x
    CameraCalibration {
        fx: 1000.0,
        fy: 1000.0,
        cx: 1024.0,
        cy: 768.0,
        rotation: [[0.0, -1.0, 0.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0]],
        translation: [0.0, 0.0, 0.0],
        width: DEFAULT_WIDTH,
        height: DEFAULT_HEIGHT,
    }
}
