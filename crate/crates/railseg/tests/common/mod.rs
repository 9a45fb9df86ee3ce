#![allow(dead_code)]

use std::path::Path;

use railseg::ops::{self, SpeedSource, SynthOptions};
use railseg::Dataset;
use railseg_core::synth::CameraRig;
use railseg_core::{PredictionMatrix, N_CLASSES};

/// The default field of view at half resolution keeps debug-build
/// synthesis fast.
pub fn small_camera() -> CameraRig {
    CameraRig {
        width: 1024,
        height: 768,
        fx: 500.0,
        fy: 500.0,
        ..CameraRig::default()
    }
}

pub fn synth(dir: &Path, scans: usize, test_scans: usize, predictions: bool) -> Dataset {
    let opts = SynthOptions {
        seed: 42,
        scans,
        test_scans,
        camera: small_camera(),
        predictions,
        ..SynthOptions::default()
    };
    ops::synth_dataset(dir, &opts).unwrap()
}

/// Synthesis followed by every stage up to label transfer.
pub fn prepared(dir: &Path, scans: usize, test_scans: usize) -> Dataset {
    let mut ds = synth(dir, scans, test_scans, true);
    ops::preprocess(&mut ds, 1.5, 8, 2.0).unwrap();
    ops::sync(&mut ds, 0.010).unwrap();
    ops::motion_correct_all(&mut ds, SpeedSource::Manifest).unwrap();
    ops::transfer(&mut ds).unwrap();
    ds
}

/// Mean normalized entropy and mean `1 - max p`, by direct summation in
/// natural log.
pub fn naive_scores(m: &PredictionMatrix) -> (f64, f64) {
    let n = m.n_points();
    let (mut h, mut u) = (0.0, 0.0);
    for i in 0..n {
        let row = m.row(i);
        let mut hi = 0.0;
        let mut mx = 0.0f64;
        for &p in row {
            let p = p as f64;
            if p > 0.0 {
                hi -= p * p.ln();
            }
            mx = mx.max(p);
        }
        h += (hi / (N_CLASSES as f64).ln()).clamp(0.0, 1.0);
        u += 1.0 - mx;
    }
    (h / n as f64, u / n as f64)
}

/// First `n` scan ids by rank sum, where a scan's rank under a score is one
/// plus the number of scans that beat it (ties go to the smaller id).
pub fn naive_selection(scores: &[(String, f64, f64)], n: usize) -> Vec<String> {
    let beats = |a: &(String, f64, f64), b: &(String, f64, f64), h: bool| {
        let (x, y) = if h { (a.1, b.1) } else { (a.2, b.2) };
        x > y || (x == y && a.0 < b.0)
    };
    let mut ranked: Vec<(usize, usize, String)> = scores
        .iter()
        .map(|s| {
            let rh = 1 + scores.iter().filter(|o| beats(o, s, true)).count();
            let ru = 1 + scores.iter().filter(|o| beats(o, s, false)).count();
            (rh + ru, rh, s.0.clone())
        })
        .collect();
    ranked.sort();
    ranked.into_iter().take(n).map(|r| r.2).collect()
}
