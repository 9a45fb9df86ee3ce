use proptest::prelude::*;
use railseg_core::active::*;
use railseg_core::{PredictionMatrix, N_CLASSES};

fn simplex() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, N_CLASSES).prop_filter_map("zero mass", |w| {
        let s: f64 = w.iter().sum();
        (s > 1e-6).then(|| w.iter().map(|x| x / s).collect())
    })
}

fn matrix(id: String, rows: &[Vec<f64>]) -> PredictionMatrix {
    PredictionMatrix::new(id, rows.iter().flatten().map(|&p| p as f32).collect()).unwrap()
}

/// Naive per-point loop in natural log, divided by ln(9).
fn naive_scores(m: &PredictionMatrix) -> (f64, f64) {
    let n = m.n_points();
    let mut h = 0.0;
    let mut u = 0.0;
    for i in 0..n {
        let mut hi = 0.0;
        let mut mx = 0.0f64;
        for c in 0..N_CLASSES {
            let p = m.row(i)[c] as f64;
            if p > 0.0 {
                hi -= p * p.ln();
            }
            if p > mx {
                mx = p;
            }
        }
        h += (hi / (N_CLASSES as f64).ln()).clamp(0.0, 1.0);
        u += 1.0 - mx;
    }
    (h / n as f64, u / n as f64)
}

/// Counting-based ranks: rank = 1 + number of scans that beat this one.
fn naive_selection(scores: &[(String, f64, f64)], n: usize) -> Vec<(String, usize, usize)> {
    let beats = |a: &(String, f64, f64), b: &(String, f64, f64), h: bool| {
        let (x, y) = if h { (a.1, b.1) } else { (a.2, b.2) };
        x > y || (x == y && a.0 < b.0)
    };
    let mut out: Vec<(String, usize, usize)> = scores
        .iter()
        .map(|s| {
            let rh = 1 + scores.iter().filter(|o| beats(o, s, true)).count();
            let ru = 1 + scores.iter().filter(|o| beats(o, s, false)).count();
            (s.0.clone(), rh, ru)
        })
        .collect();
    out.sort_by(|a, b| (a.1 + a.2, a.1, &a.0).cmp(&(b.1 + b.2, b.1, &b.0)));
    out.truncate(n);
    out
}

#[test]
fn unit_values() {
    let uniform = [1.0 / 9.0; 9];
    assert!((point_entropy(&uniform).unwrap() - 1.0).abs() < 1e-9);
    assert!((point_uncertainty(&uniform).unwrap() - 8.0 / 9.0).abs() < 1e-9);
    let mut hot = [0.0; 9];
    hot[3] = 1.0;
    assert_eq!(point_entropy(&hot).unwrap(), 0.0);
    assert_eq!(point_uncertainty(&hot).unwrap(), 0.0);
    let mut half = [0.0; 9];
    half[0] = 0.5;
    half[1] = 0.5;
    assert!((point_entropy(&half).unwrap() - 1.0 / 9f64.log2()).abs() < 1e-9);
    let mut v = [0.0; 9];
    v[..3].copy_from_slice(&[0.6, 0.3, 0.1]);
    assert!((point_uncertainty(&v).unwrap() - 0.4).abs() < 1e-9);
}

#[test]
fn fifteen_scans_selection_matches_oracle() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(15);
    let preds: Vec<PredictionMatrix> = (0..15)
        .map(|s| {
            let sharp = rng.gen_range(0.1..8.0);
            let rows: Vec<Vec<f64>> = (0..rng.gen_range(20..60))
                .map(|_| {
                    let w: Vec<f64> = (0..9).map(|_| (rng.gen_range(0.0..1.0f64) * sharp).exp()).collect();
                    let t: f64 = w.iter().sum();
                    w.iter().map(|x| x / t).collect()
                })
                .collect();
            matrix(format!("scan-{s:02}"), &rows)
        })
        .collect();
    let res = select_for_labeling(&preds, 10, 3).unwrap();
    let scores: Vec<(String, f64, f64)> = preds
        .iter()
        .map(|m| {
            let (h, u) = naive_scores(m);
            (m.scan_id().to_string(), h, u)
        })
        .collect();
    let oracle = naive_selection(&scores, 10);
    assert_eq!(res.selected, oracle.iter().map(|o| o.0.clone()).collect::<Vec<_>>());
    for (r, o) in res.ranked.iter().zip(&oracle) {
        assert_eq!((r.rank_h, r.rank_u, r.rank_sum), (o.1, o.2, o.1 + o.2));
    }
    assert_eq!(res.iteration, 3);
    assert_eq!(select_for_labeling(&preds, 10, 3).unwrap(), res);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn scores_are_permutation_invariant_and_bounded(p in simplex(), rot in 0usize..9) {
        let mut q = p.clone();
        q.rotate_left(rot);
        q.swap(0, 8);
        let (h, u) = (point_entropy(&p).unwrap(), point_uncertainty(&p).unwrap());
        prop_assert!((h - point_entropy(&q).unwrap()).abs() < 1e-12);
        prop_assert_eq!(u, point_uncertainty(&q).unwrap());
        prop_assert!((0.0..=1.0).contains(&h));
        prop_assert!(u >= 0.0 && u <= 1.0 - 1.0 / 9.0 + 1e-12);
    }

    #[test]
    fn sharpening_never_raises_uncertainty(p in simplex(), from in 0usize..9, frac in 0.0f64..1.0) {
        let max_i = (0..9).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
        prop_assume!(from != max_i);
        let mut q = p.clone();
        let eps = q[from] * frac;
        q[from] -= eps;
        q[max_i] += eps;
        prop_assert!(point_uncertainty(&q).unwrap() <= point_uncertainty(&p).unwrap() + 1e-15);
    }

    #[test]
    fn only_uniform_reaches_full_entropy(p in simplex()) {
        let uniform = p.iter().all(|&x| (x - 1.0 / 9.0).abs() < 1e-12);
        prop_assume!(!uniform);
        prop_assert!(point_entropy(&p).unwrap() < 1.0);
    }

    #[test]
    fn scan_score_matches_naive_loop(rows in prop::collection::vec(simplex(), 100)) {
        let m = matrix("s".into(), &rows);
        let s = score_scan(&m).unwrap();
        let (h, u) = naive_scores(&m);
        prop_assert!((s.mean_entropy - h).abs() < 1e-12);
        prop_assert!((s.mean_uncertainty - u).abs() < 1e-12);
        prop_assert_eq!(s.n_points, 100);
    }

    #[test]
    fn ranking_matches_full_sort_oracle(raw in prop::collection::vec((0u8..20, 0u8..20), 1..20), n in 1usize..25) {
        // coarse grid values force ties within each score
        let scores: Vec<ScanScore> = raw
            .iter()
            .enumerate()
            .map(|(i, &(h, u))| ScanScore {
                scan_id: format!("s{:02}", (i * 7) % 20 + 100 * (i / 20)),
                mean_entropy: h as f64 / 20.0,
                mean_uncertainty: u as f64 / 20.0,
                n_points: 1,
            })
            .collect();
        let res = select_top(&scores, n, 0).unwrap();
        let tuples: Vec<(String, f64, f64)> = scores.iter().map(|s| (s.scan_id.clone(), s.mean_entropy, s.mean_uncertainty)).collect();
        let oracle = naive_selection(&tuples, usize::MAX);
        prop_assert_eq!(res.ranked.len(), scores.len());
        for (r, o) in res.ranked.iter().zip(&oracle) {
            prop_assert_eq!(&r.scan_id, &o.0);
            prop_assert_eq!((r.rank_h, r.rank_u), (o.1, o.2));
        }
        prop_assert_eq!(res.selected.len(), n.min(scores.len()));
        let mut hs: Vec<usize> = res.ranked.iter().map(|r| r.rank_h).collect();
        hs.sort_unstable();
        prop_assert_eq!(hs, (1..=scores.len()).collect::<Vec<_>>());
    }

    #[test]
    fn ranking_depends_only_on_order(raw in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..20)) {
        let mk = |f: &dyn Fn(f64) -> f64| -> Vec<ScanScore> {
            raw.iter()
                .enumerate()
                .map(|(i, &(h, u))| ScanScore {
                    scan_id: format!("scan{i:02}"),
                    mean_entropy: f(h),
                    mean_uncertainty: u,
                    n_points: 10,
                })
                .collect()
        };
        let a = select_top(&mk(&|x| x), 10, 1).unwrap();
        let b = select_top(&mk(&|x| x * x * 0.5 + 0.1), 10, 1).unwrap();
        let c = select_top(&mk(&|x| (3.0 * x).exp()), 10, 1).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&a, &c);
    }
}
