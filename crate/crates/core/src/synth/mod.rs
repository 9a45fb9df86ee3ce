//! Seeded synthetic scans with exact ground truth.
//!
//! A rotating LiDAR is simulated by casting rays against an analytic railway
//! [`Scene`]. Hits are thinned per class to the configured class shares, each
//! point gets a capture time from its azimuth, and housing reflections are
//! injected near the sensor. The moving-sensor recording is produced by
//! applying the motion distortion, and the camera's label image is rendered
//! by casting one ray per pixel center through the same scene. The seed
//! fully determines every output.

use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cloud::SCAN_PERIOD;
use crate::preprocess::{apply_motion_distortion, MotionParams};
use crate::transfer::{CameraCalibration, LabelImage, DEFAULT_HEIGHT, DEFAULT_WIDTH};
use crate::{ClassId, Error, LabelArray, Point, PointCloud, PointLabel, Result, N_CLASSES};

mod scene;

pub use scene::{Primitive, Scene, Shape, GROUND_Z};

/// Per-class point shares of the reference railway test split, in class id
/// order.
pub const RAILWAY_DENSITIES: [f64; N_CLASSES] = [
    0.1044, 0.0128, 0.0955, 0.0771, 0.0604, 0.0048, 0.0058, 0.4073, 0.2318,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraRig {
    /// Camera center in the LiDAR frame, meters.
    pub position: [f64; 3],
    /// Downward tilt of the optical axis, radians.
    pub pitch: f64,
    pub fx: f64,
    pub fy: f64,
    pub width: u32,
    pub height: u32,
}

impl Default for CameraRig {
    fn default() -> Self {
        CameraRig {
            position: [0.0, 0.0, 0.0],
            pitch: 5f64.to_radians(),
            fx: 1000.0,
            fy: 1000.0,
            width: DEFAULT_WIDTH,
            height: DEFAULT_HEIGHT,
        }
    }
}

impl CameraRig {
    pub fn calibration(&self) -> CameraCalibration {
        let (s, c) = (libm::sin(self.pitch), libm::cos(self.pitch));
        // rows: camera right, down and forward axes in LiDAR coordinates
        let rotation = [[0.0, -1.0, 0.0], [-s, 0.0, -c], [c, 0.0, -s]];
        let rc = crate::geom::mat_vec(&rotation, self.position);
        CameraCalibration {
            fx: self.fx,
            fy: self.fy,
            cx: self.width as f64 / 2.0,
            cy: self.height as f64 / 2.0,
            rotation,
            translation: [-rc[0], -rc[1], -rc[2]],
            width: self.width,
            height: self.height,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSceneConfig {
    pub seed: u64,
    /// Half-size of the terrain square and maximum LiDAR range, meters.
    pub extent: f64,
    /// Relative point share per 3D class, in class id order.
    pub densities: [f64; N_CLASSES],
    /// Scene points kept after thinning (reflections come on top).
    pub scene_points: usize,
    /// Train speed, m/s.
    pub speed: f64,
    /// Duration of one sweep, seconds; at most the 250 ms scan period.
    pub sweep_duration: f64,
    /// Share of all output points that are housing reflections, `[0, 1)`.
    pub reflection_fraction: f64,
    pub rings: usize,
    pub azimuth_steps: usize,
    /// Elevation range of the rings, radians.
    pub elevation: (f64, f64),
    pub camera: CameraRig,
}

impl Default for SynthSceneConfig {
    fn default() -> Self {
        SynthSceneConfig {
            seed: 0,
            extent: 80.0,
            densities: RAILWAY_DENSITIES,
            scene_points: 10_000,
            speed: 20.0,
            sweep_duration: SCAN_PERIOD,
            reflection_fraction: 2.0 / 3.0,
            rings: 128,
            azimuth_steps: 3600,
            elevation: ((-15f64).to_radians(), 15f64.to_radians()),
            camera: CameraRig::default(),
        }
    }
}

impl SynthSceneConfig {
    pub fn with_seed(seed: u64) -> Self {
        SynthSceneConfig {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.extent.is_finite() && self.extent > 0.0) {
            return Err(Error::DegenerateConfig("extent must be positive"));
        }
        if self.densities.iter().any(|d| !(d.is_finite() && *d >= 0.0)) || self.densities.iter().sum::<f64>() <= 0.0 {
            return Err(Error::DegenerateConfig("densities must be non-negative with a positive sum"));
        }
        if self.scene_points == 0 || self.rings == 0 || self.azimuth_steps == 0 {
            return Err(Error::DegenerateConfig("point, ring and azimuth counts must be nonzero"));
        }
        if !(self.sweep_duration > 0.0 && self.sweep_duration <= SCAN_PERIOD) {
            return Err(Error::DegenerateConfig("sweep duration must lie in (0, 0.25] s"));
        }
        if !(0.0..1.0).contains(&self.reflection_fraction) {
            return Err(Error::DegenerateConfig("reflection fraction must lie in [0, 1)"));
        }
        if !(self.elevation.0 < self.elevation.1) {
            return Err(Error::DegenerateConfig("empty elevation range"));
        }
        MotionParams::forward(self.speed)?;
        self.camera.calibration().validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthScene {
    /// Scene in the scan-start pose (what a correct deskew must recover).
    pub undistorted: PointCloud,
    /// What the moving sensor records.
    pub distorted: PointCloud,
    /// Generator classes; reflections are `UNLABELED`.
    pub labels: LabelArray,
    pub label_image: LabelImage,
    pub calibration: CameraCalibration,
    pub motion: MotionParams,
    pub scene: Scene,
}

/// Points and label image for one synthetic scan.
pub fn synth_scene(cfg: &SynthSceneConfig) -> Result<SynthScene> {
    let (undistorted, labels, scene, motion) = synth_points(cfg)?;
    let calibration = cfg.camera.calibration();
    let label_image = render_label_image(&scene, &calibration)?;
    let distorted = apply_motion_distortion(&undistorted, &motion);
    Ok(SynthScene {
        undistorted,
        distorted,
        labels,
        label_image,
        calibration,
        motion,
        scene,
    })
}

/// Everything except the label image, which dominates the cost.
pub fn synth_points(cfg: &SynthSceneConfig) -> Result<(PointCloud, LabelArray, Scene, MotionParams)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let scene = Scene::railway(cfg.extent, &mut rng);
    let motion = MotionParams::forward(cfg.speed)?;

    // (azimuth step, ring, hit) grouped per class
    let mut hits: Vec<Vec<(usize, [f64; 3])>> = alloc::vec![Vec::new(); N_CLASSES];
    let (el_lo, el_hi) = cfg.elevation;
    let rings: Vec<(f64, f64)> = (0..cfg.rings)
        .map(|r| {
            let el = if cfg.rings == 1 {
                el_lo
            } else {
                el_lo + (el_hi - el_lo) * r as f64 / (cfg.rings - 1) as f64
            };
            (libm::sin(el), libm::cos(el))
        })
        .collect();
    for k in 0..cfg.azimuth_steps {
        let az = -core::f64::consts::PI + core::f64::consts::TAU * k as f64 / cfg.azimuth_steps as f64;
        let (sa, ca) = (libm::sin(az), libm::cos(az));
        for &(se, ce) in &rings {
            let d = [ce * ca, ce * sa, se];
            if let Some((t, class)) = scene.cast([0.0; 3], d, cfg.extent) {
                if let Some(ci) = class.index() {
                    hits[ci].push((k, crate::geom::scale(d, t)));
                }
            }
        }
    }

    let total_w: f64 = cfg.densities.iter().sum();
    // (azimuth position in [0, 1), class, position)
    let mut points: Vec<(f64, ClassId, [f64; 3])> = Vec::new();
    for (ci, class_hits) in hits.iter().enumerate() {
        let quota = libm::round(cfg.scene_points as f64 * cfg.densities[ci] / total_w) as usize;
        let take = quota.min(class_hits.len());
        let mut chosen: Vec<usize> = sample(&mut rng, class_hits.len(), take).into_vec();
        chosen.sort_unstable();
        for i in chosen {
            let (k, p) = class_hits[i];
            points.push((k as f64 / cfg.azimuth_steps as f64, ClassId::from_index(ci), p));
        }
    }

    let n_scene = points.len();
    let f = cfg.reflection_fraction;
    let n_refl = libm::round(n_scene as f64 * f / (1.0 - f)) as usize;
    for _ in 0..n_refl {
        let phase: f64 = rng.gen_range(0.0..1.0);
        let az = -core::f64::consts::PI + core::f64::consts::TAU * phase;
        let el: f64 = rng.gen_range(-0.5..0.5);
        let r: f64 = rng.gen_range(0.05..1.0);
        let d = [
            libm::cos(el) * libm::cos(az),
            libm::cos(el) * libm::sin(az),
            libm::sin(el),
        ];
        points.push((phase, ClassId::UNLABELED, crate::geom::scale(d, r)));
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut cloud_points = Vec::with_capacity(points.len());
    let mut labels = Vec::with_capacity(points.len());
    for (phase, class, p) in points {
        let base = match class {
            ClassId::UNLABELED => 0.9,
            ClassId::RAIL_TRACK | ClassId::SIGN => 0.8,
            ClassId::VEGETATION | ClassId::TERRAIN => 0.25,
            _ => 0.5,
        };
        let intensity = (base + rng.gen_range(-0.1f64..0.1)).clamp(0.0, 1.0);
        let t_rel = cfg.sweep_duration * phase;
        // reflections ride along with the sensor, so in the scan-start frame
        // they sit wherever the sensor was at capture time
        let p = if class == ClassId::UNLABELED {
            crate::geom::add(p, motion.offset(t_rel))
        } else {
            p
        };
        cloud_points.push(Point::new(p[0], p[1], p[2], intensity, t_rel));
        labels.push(PointLabel::corrected(class));
    }

    let scan_id = alloc::format!("synth-{:016x}", cfg.seed);
    let cloud = PointCloud::new(scan_id.clone(), 0.0, cloud_points);
    cloud.validate()?;
    Ok((cloud, LabelArray::new(scan_id, labels), scene, motion))
}

/// Class of the first surface along each pixel-center ray; rays that miss
/// everything are `SKY`.
pub fn render_label_image(scene: &Scene, calib: &CameraCalibration) -> Result<LabelImage> {
    let o = calib.camera_origin();
    let mut pixels = Vec::with_capacity(calib.width as usize * calib.height as usize);
    for row in 0..calib.height {
        for col in 0..calib.width {
            let d = calib.pixel_ray(col as f64, row as f64);
            let class = scene.cast(o, d, f64::INFINITY).map_or(ClassId::SKY, |(_, c)| c);
            pixels.push(class.0 as u8);
        }
    }
    LabelImage::new(calib.width, calib.height, pixels)
}
