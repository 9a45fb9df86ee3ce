use proptest::prelude::*;
use railseg_core::synth::{synth_points, SynthSceneConfig};
use railseg_core::{ClassId, LabelArray, Point, PointCloud, PointLabel, PredictionMatrix, Provenance, N_CLASSES};

fn f32_in(lo: f32, hi: f32) -> impl Strategy<Value = f64> {
    (lo..hi).prop_map(|v| v as f64)
}

fn point() -> impl Strategy<Value = Point> {
    (
        f32_in(-200.0, 200.0),
        f32_in(-200.0, 200.0),
        f32_in(-50.0, 50.0),
        f32_in(0.0, 1.0),
        f32_in(0.0, 0.2499),
    )
        .prop_map(|(x, y, z, i, t)| Point::new(x, y, z, i, t))
}

fn label() -> impl Strategy<Value = PointLabel> {
    (0u16..=9, any::<bool>()).prop_map(|(c, corrected)| {
        if corrected {
            PointLabel::corrected(ClassId(c))
        } else {
            PointLabel::auto(ClassId(c))
        }
    })
}

/// Random simplex rows: exponentials normalised in f64, then rounded to f32.
fn simplex_rows(max_rows: usize) -> impl Strategy<Value = Vec<f32>> {
    prop::collection::vec(prop::array::uniform9(0.0f64..5.0), 0..max_rows).prop_map(|rows| {
        rows.iter()
            .flat_map(|r| {
                let w: Vec<f64> = r.iter().map(|x| x.exp()).collect();
                let s: f64 = w.iter().sum();
                w.into_iter().map(move |v| (v / s) as f32)
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn cloud_bytes_round_trip(points in prop::collection::vec(point(), 0..64)) {
        let cloud = PointCloud::new("s", 12.5, points);
        let bytes = cloud.encode().unwrap();
        prop_assert_eq!(bytes.len(), 20 * cloud.len());
        let back = PointCloud::decode("s", 12.5, &bytes).unwrap();
        prop_assert_eq!(&back, &cloud);
        prop_assert_eq!(back.encode().unwrap(), bytes);
    }

    #[test]
    fn label_bytes_round_trip(labels in prop::collection::vec(label(), 0..128)) {
        let arr = LabelArray::new("s", labels);
        let bytes = arr.encode().unwrap();
        let back = LabelArray::decode("s", &bytes, Some(arr.len())).unwrap();
        prop_assert_eq!(&back, &arr);
        prop_assert_eq!(back.encode().unwrap(), bytes);
    }

    #[test]
    fn prediction_bytes_round_trip(probs in simplex_rows(32)) {
        let m = PredictionMatrix::new("s", probs).unwrap();
        let bytes = m.encode();
        prop_assert_eq!(bytes.len(), 8 + 4 * N_CLASSES * m.n_points());
        let back = PredictionMatrix::decode("s", &bytes).unwrap();
        let max_diff = back.as_slice().iter().zip(m.as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0f32, f32::max);
        prop_assert_eq!(max_diff, 0.0);
        prop_assert_eq!(back.encode(), bytes);
    }

    #[test]
    fn label_word_layout(class in 0u16..=9, corrected in any::<bool>()) {
        let word = class as u32 | if corrected { 1 << 16 } else { 0 };
        let l = PointLabel::from_word(0, word).unwrap();
        prop_assert_eq!(l.class, ClassId(class));
        prop_assert_eq!(l.provenance == Provenance::Corrected, corrected);
        prop_assert_eq!(l.to_word(), word);
    }
}

#[test]
fn synthetic_cloud_round_trips_bit_exactly() {
    let cfg = SynthSceneConfig {
        reflection_fraction: 0.0,
        ..SynthSceneConfig::with_seed(42)
    };
    let (cloud, labels, _, _) = synth_points(&cfg).unwrap();
    assert!(cloud.len() >= 9_900, "{} points", cloud.len());
    let bytes = cloud.encode().unwrap();
    let again = PointCloud::decode(cloud.scan_id.clone(), cloud.t_scan, &bytes).unwrap().encode().unwrap();
    assert_eq!(bytes, again);
    let lb = labels.encode().unwrap();
    assert_eq!(LabelArray::decode("x", &lb, Some(cloud.len())).unwrap().encode().unwrap(), lb);
}

#[test]
fn f64_coordinates_round_to_f32_once() {
    let cloud = PointCloud::new("s", 0.0, vec![Point::new(0.1, -7.3, 2.0, 0.5, 0.1)]);
    let bytes = cloud.encode().unwrap();
    let back = PointCloud::decode("s", 0.0, &bytes).unwrap();
    assert_eq!(back.points[0].x, 0.1f32 as f64);
    assert_eq!(back.encode().unwrap(), bytes);
}

#[test]
fn oversized_coordinate_is_rejected() {
    let cloud = PointCloud::new("s", 0.0, vec![Point::new(1e300, 0.0, 0.0, 0.5, 0.0)]);
    assert!(cloud.encode().is_err());
}
