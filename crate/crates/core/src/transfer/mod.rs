//! Automatic prelabeling by projecting points into a segmented camera image,
//! followed by human corrections.

use alloc::vec::Vec;

use crate::{ClassId, Error, LabelArray, PointCloud, PointLabel, Provenance, Result};

mod calib;
mod corrections;
mod image;

pub use calib::{project_points, CameraCalibration, Pixel, DEFAULT_HEIGHT, DEFAULT_WIDTH, Z_MIN};
pub use corrections::{apply_corrections, Correction, CorrectionSet};
pub use image::{decode_pgm, encode_pgm, ClassMap, ClassMapEntry, LabelImage};

#[cfg(test)]
pub(crate) use calib::test_calibration;

/// Pixel holding the continuous image coordinate `(u, v)`: nearest pixel
/// center, halves rounding down, clamped to the image.
pub fn nearest_pixel(px: Pixel, width: u32, height: u32) -> (u32, u32) {
    let round = |x: f64, n: u32| (libm::ceil(x - 0.5).max(0.0) as u32).min(n - 1);
    (round(px.u, width), round(px.v, height))
}

/// Labels every point with the class of the pixel it projects to.
///
/// Image-only classes (sky, background) and points without a valid
/// projection become `UNLABELED`. No occlusion test is made: a point hidden
/// behind a foreground object takes the foreground class. All labels carry
/// provenance `Auto`.
pub fn transfer_labels(cloud: &PointCloud, image: &LabelImage, calib: &CameraCalibration) -> Result<LabelArray> {
    if image.width() != calib.width || image.height() != calib.height {
        return Err(Error::DimensionMismatch {
            expected_w: calib.width,
            expected_h: calib.height,
            found_w: image.width(),
            found_h: image.height(),
        });
    }
    calib.validate()?;
    let labels: Vec<PointLabel> = project_points(cloud, calib)
        .into_iter()
        .map(|px| {
            let class = px
                .map(|px| {
                    let (col, row) = nearest_pixel(px, image.width(), image.height());
                    image.get(col, row)
                })
                .filter(|c| c.is_3d())
                .unwrap_or(ClassId::UNLABELED);
            PointLabel::auto(class)
        })
        .collect();
    Ok(LabelArray::new(cloud.scan_id.clone(), labels))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct LabelStatus {
    pub auto_count: usize,
    pub corrected_count: usize,
    /// Points with class `UNLABELED`, whatever their provenance.
    pub unlabeled_count: usize,
}

/// Provenance counts (`auto_count + corrected_count == n`) plus the number
/// of unlabeled points.
pub fn label_status(labels: &LabelArray) -> LabelStatus {
    labels.labels.iter().fold(LabelStatus::default(), |mut s, l| {
        match l.provenance {
            Provenance::Auto => s.auto_count += 1,
            Provenance::Corrected => s.corrected_count += 1,
        }
        if l.class == ClassId::UNLABELED {
            s.unlabeled_count += 1;
        }
        s
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Point;
    use alloc::vec;

    fn one_point(x: f64, y: f64, z: f64) -> PointCloud {
        PointCloud::new("s", 0.0, vec![Point::new(x, y, z, 0.5, 0.0)])
    }

    #[test]
    fn half_rounds_down() {
        let px = |u, v| Pixel { u, v };
        assert_eq!(nearest_pixel(px(2.5, 3.5), 10, 10), (2, 3));
        assert_eq!(nearest_pixel(px(2.51, 3.49), 10, 10), (3, 3));
        assert_eq!(nearest_pixel(px(0.2, 9.9), 10, 10), (0, 9));
    }

    #[test]
    fn all_sky_is_unlabeled() {
        let calib = test_calibration();
        let img = LabelImage::filled(calib.width, calib.height, ClassId::SKY).unwrap();
        let cloud = PointCloud::new(
            "s",
            0.0,
            vec![Point::new(10.0, 0.0, 0.0, 0.5, 0.0), Point::new(20.0, 3.0, 1.0, 0.5, 0.0)],
        );
        let labels = transfer_labels(&cloud, &img, &calib).unwrap();
        assert!(labels.labels.iter().all(|l| *l == PointLabel::auto(ClassId::UNLABELED)));
    }

    #[test]
    fn vegetation_pixel() {
        let calib = test_calibration();
        let mut px = vec![ClassId::SKY.0 as u8; (calib.width * calib.height) as usize];
        px[768 * 2048 + 1024] = ClassId::VEGETATION.0 as u8;
        let img = LabelImage::new(calib.width, calib.height, px).unwrap();
        let labels = transfer_labels(&one_point(10.0, 0.0, 0.0), &img, &calib).unwrap();
        assert_eq!(labels.labels[0], PointLabel::auto(ClassId::VEGETATION));
    }

    #[test]
    fn invalid_projection_is_unlabeled() {
        let calib = test_calibration();
        let img = LabelImage::filled(calib.width, calib.height, ClassId::TERRAIN).unwrap();
        let labels = transfer_labels(&one_point(-10.0, 0.0, 0.0), &img, &calib).unwrap();
        assert_eq!(labels.labels[0].class, ClassId::UNLABELED);
    }

    #[test]
    fn dimension_mismatch() {
        let calib = test_calibration();
        let img = LabelImage::filled(640, 480, ClassId::TERRAIN).unwrap();
        assert!(matches!(
            transfer_labels(&one_point(10.0, 0.0, 0.0), &img, &calib),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn status_counts() {
        let labels = LabelArray::new(
            "s",
            vec![
                PointLabel::auto(ClassId::TERRAIN),
                PointLabel::auto(ClassId::UNLABELED),
                PointLabel::corrected(ClassId::PERSON),
                PointLabel::corrected(ClassId::UNLABELED),
            ],
        );
        assert_eq!(
            label_status(&labels),
            LabelStatus {
                auto_count: 2,
                corrected_count: 2,
                unlabeled_count: 2
            }
        );
    }
}
