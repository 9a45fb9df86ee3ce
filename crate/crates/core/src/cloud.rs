//! Point clouds and their on-disk record format.
//!
//! A cloud file is a bare sequence of 20-byte records, each five
//! little-endian `f32` values `x, y, z, intensity, t_rel`. Scan id and scan
//! start time are not stored in the file; they come from the dataset
//! manifest. In memory every value is kept as `f64`, so loading is exact and
//! `encode(decode(b)) == b` for any valid buffer.

use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result};

pub const RECORD_SIZE: usize = 20;

/// Rotation period of the scanner at 4 Hz; `t_rel` must stay below it.
pub const SCAN_PERIOD: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    /// Meters in the sensor frame: +x along travel, +z up.
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// Unitless return strength in `[0, 1]`.
    pub intensity: f64,
    /// Seconds between scan start and the capture of this point.
    pub t_rel: f64,
}

impl Point {
    pub fn new(x: f64, y: f64, z: f64, intensity: f64, t_rel: f64) -> Self {
        Point {
            x,
            y,
            z,
            intensity,
            t_rel,
        }
    }

    pub fn position(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn set_position(&mut self, p: [f64; 3]) {
        self.x = p[0];
        self.y = p[1];
        self.z = p[2];
    }

    /// Euclidean distance from the sensor origin.
    pub fn range(&self) -> f64 {
        crate::geom::norm(self.position())
    }

    fn check(&self, index: usize) -> Result<()> {
        let values = [self.x, self.y, self.z, self.intensity, self.t_rel];
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if !(0.0..=1.0).contains(&self.intensity) {
            return Err(Error::OutOfRange {
                index,
                field: "intensity",
                value: self.intensity,
            });
        }
        if !(0.0..SCAN_PERIOD).contains(&self.t_rel) {
            return Err(Error::OutOfRange {
                index,
                field: "t_rel",
                value: self.t_rel,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub scan_id: String,
    /// Scan start, seconds since the epoch.
    pub t_scan: f64,
    pub points: Vec<Point>,
}

impl PointCloud {
    pub fn new(scan_id: impl Into<String>, t_scan: f64, points: Vec<Point>) -> Self {
        PointCloud {
            scan_id: scan_id.into(),
            t_scan,
            points,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        self.points.iter().enumerate().try_for_each(|(i, p)| p.check(i))
    }

    /// Absolute capture time of point `i`.
    pub fn point_time(&self, i: usize) -> f64 {
        self.t_scan + self.points[i].t_rel
    }

    /// Keeps the points whose mask entry is set, preserving order.
    pub fn select(&self, keep: &[bool]) -> Result<PointCloud> {
        if keep.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: keep.len(),
            });
        }
        let points = self
            .points
            .iter()
            .zip(keep)
            .filter_map(|(p, &k)| k.then_some(*p))
            .collect();
        Ok(PointCloud {
            scan_id: self.scan_id.clone(),
            t_scan: self.t_scan,
            points,
        })
    }

    pub fn decode(scan_id: impl Into<String>, t_scan: f64, bytes: &[u8]) -> Result<PointCloud> {
        if bytes.len() % RECORD_SIZE != 0 {
            return Err(Error::Truncated {
                len: bytes.len(),
                record: RECORD_SIZE,
            });
        }
        let mut points = Vec::with_capacity(bytes.len() / RECORD_SIZE);
        for (index, rec) in bytes.chunks_exact(RECORD_SIZE).enumerate() {
            let f = |k: usize| {
                let mut w = [0u8; 4];
                w.copy_from_slice(&rec[4 * k..4 * k + 4]);
                f32::from_le_bytes(w) as f64
            };
            let p = Point::new(f(0), f(1), f(2), f(3), f(4));
            p.check(index)?;
            points.push(p);
        }
        Ok(PointCloud::new(scan_id, t_scan, points))
    }

    /// Encodes to the 20-byte record format. Values are rounded to `f32`; a
    /// value that overflows `f32` is reported as non-finite.
    pub fn encode(&self) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(self.len() * RECORD_SIZE);
        for (index, p) in self.points.iter().enumerate() {
            p.check(index)?;
            for v in [p.x, p.y, p.z, p.intensity, p.t_rel] {
                let v = v as f32;
                if !v.is_finite() {
                    return Err(Error::NonFinite { index });
                }
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn record(vals: [f32; 5]) -> Vec<u8> {
        vals.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    #[test]
    fn single_record() {
        let cloud = PointCloud::decode("s", 0.0, &record([1.0, 2.0, 3.0, 0.5, 0.01])).unwrap();
        assert_eq!(cloud.len(), 1);
        let p = cloud.points[0];
        assert_eq!((p.x, p.y, p.z), (1.0, 2.0, 3.0));
        assert_eq!(p.intensity, 0.5);
        assert_eq!(p.t_rel, 0.01f32 as f64);
    }

    #[test]
    fn empty_buffer_is_empty_cloud() {
        let cloud = PointCloud::decode("s", 0.0, &[]).unwrap();
        assert!(cloud.is_empty());
        assert!(cloud.encode().unwrap().is_empty());
    }

    #[test]
    fn one_point_is_twenty_bytes() {
        let cloud = PointCloud::new("s", 0.0, vec![Point::new(1.0, -2.0, 0.5, 0.1, 0.2)]);
        assert_eq!(cloud.encode().unwrap().len(), 20);
    }

    #[test]
    fn truncated() {
        let mut b = record([1.0, 2.0, 3.0, 0.5, 0.01]);
        b.pop();
        assert_eq!(
            PointCloud::decode("s", 0.0, &b),
            Err(Error::Truncated { len: 19, record: 20 })
        );
    }

    #[test]
    fn non_finite_reports_index() {
        let mut b = record([1.0, 2.0, 3.0, 0.5, 0.01]);
        b.extend(record([1.0, f32::NAN, 3.0, 0.5, 0.01]));
        assert_eq!(PointCloud::decode("s", 0.0, &b), Err(Error::NonFinite { index: 1 }));
    }

    #[test]
    fn t_rel_outside_scan_period() {
        let b = record([1.0, 2.0, 3.0, 0.5, 0.25]);
        assert!(matches!(
            PointCloud::decode("s", 0.0, &b),
            Err(Error::OutOfRange { index: 0, field: "t_rel", .. })
        ));
    }

    #[test]
    fn select_requires_full_mask() {
        let cloud = PointCloud::new("s", 0.0, vec![Point::default(); 3]);
        assert!(cloud.select(&[true, false]).is_err());
        assert_eq!(cloud.select(&[true, false, true]).unwrap().len(), 2);
    }
}
