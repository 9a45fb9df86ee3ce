use railseg_core::preprocess::motion_correct;
use railseg_core::synth::*;
use railseg_core::{ClassId, N_CLASSES};

#[test]
fn class_frequencies_follow_densities() {
    for seed in [1, 42, 99] {
        let cfg = SynthSceneConfig::with_seed(seed);
        let (_, labels, _, _) = synth_points(&cfg).unwrap();
        let mut counts = [0usize; N_CLASSES];
        for c in labels.classes() {
            if let Some(i) = c.index() {
                counts[i] += 1;
            }
        }
        let total: usize = counts.iter().sum();
        let wsum: f64 = cfg.densities.iter().sum();
        for (i, &n) in counts.iter().enumerate() {
            let want = cfg.densities[i] / wsum;
            let got = n as f64 / total as f64;
            assert!((got - want).abs() <= 0.2 * want, "seed {seed} class {}: {got} vs {want}", i + 1);
        }
    }
}

#[test]
fn same_seed_same_bytes() {
    let cfg = SynthSceneConfig::with_seed(42);
    let (a, la, _, _) = synth_points(&cfg).unwrap();
    let (b, lb, _, _) = synth_points(&cfg).unwrap();
    assert_eq!(a.encode().unwrap(), b.encode().unwrap());
    assert_eq!(la.encode().unwrap(), lb.encode().unwrap());
}

#[test]
fn deskew_recovers_generator_geometry() {
    let cfg = SynthSceneConfig {
        speed: 27.78,
        sweep_duration: 0.1,
        ..SynthSceneConfig::with_seed(5)
    };
    let s = synth_scene(&SynthSceneConfig {
        camera: CameraRig {
            width: 64,
            height: 48,
            fx: 32.0,
            fy: 32.0,
            ..CameraRig::default()
        },
        ..cfg
    })
    .unwrap();
    let fixed = motion_correct(&s.distorted, &s.motion);
    let mut max_shift = 0.0f64;
    for ((u, d), f) in s.undistorted.points.iter().zip(&s.distorted.points).zip(&fixed.points) {
        max_shift = max_shift.max((u.x - d.x).abs());
        for ax in 0..3 {
            assert!((u.position()[ax] - f.position()[ax]).abs() < 1e-6);
        }
    }
    assert!(max_shift > 2.7 && max_shift <= 2.8, "{max_shift}");
}

#[test]
fn image_has_sky_background_and_every_point_class() {
    let cfg = SynthSceneConfig {
        camera: CameraRig {
            width: 512,
            height: 384,
            fx: 250.0,
            fy: 250.0,
            ..CameraRig::default()
        },
        ..SynthSceneConfig::with_seed(42)
    };
    let s = synth_scene(&cfg).unwrap();
    let mut seen = [false; 12];
    for &p in s.label_image.pixels() {
        seen[p as usize] = true;
    }
    assert!(seen[ClassId::SKY.0 as usize] && seen[ClassId::BACKGROUND.0 as usize]);
    assert!(!seen[0]);
    for c in [ClassId::RAIL_TRACK, ClassId::TRACKBED, ClassId::TERRAIN, ClassId::VEGETATION, ClassId::ON_TRACKS] {
        assert!(seen[c.0 as usize], "{c}");
    }
}
