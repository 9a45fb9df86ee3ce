use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncPair {
    pub scan_id: String,
    pub image_id: String,
    /// `t_image - t_scan`, seconds.
    pub dt: f64,
}

/// Pairs LiDAR scans with camera images whose timestamps differ by less than
/// `max_dt`.
///
/// Every admissible (scan, image) edge is considered in ascending `|dt|`
/// (ties by scan id, then image id) and accepted when neither side is
/// already used, so each scan and each image appears at most once. The result
/// is ordered by scan time. Non-finite timestamps never pair.
pub fn sync_pairs(scans: &[(String, f64)], images: &[(String, f64)], max_dt: f64) -> Vec<SyncPair> {
    let mut imgs: Vec<(usize, f64)> = images
        .iter()
        .enumerate()
        .filter(|(_, (_, t))| t.is_finite())
        .map(|(i, (_, t))| (i, *t))
        .collect();
    imgs.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

    let mut edges: Vec<(f64, usize, usize)> = Vec::new();
    for (s, (_, ts)) in scans.iter().enumerate() {
        if !ts.is_finite() {
            continue;
        }
        let start = imgs.partition_point(|&(_, ti)| ti <= ts - max_dt);
        for &(i, ti) in imgs[start..].iter().take_while(|&&(_, ti)| ti < ts + max_dt) {
            let dt = ti - ts;
            if dt.abs() < max_dt {
                edges.push((dt.abs(), s, i));
            }
        }
    }
    edges.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then_with(|| scans[a.1].0.cmp(&scans[b.1].0))
            .then_with(|| images[a.2].0.cmp(&images[b.2].0))
    });

    let mut scan_used = alloc::vec![false; scans.len()];
    let mut image_used = alloc::vec![false; images.len()];
    let mut chosen: Vec<(usize, usize)> = Vec::new();
    for (_, s, i) in edges {
        if !scan_used[s] && !image_used[i] {
            scan_used[s] = true;
            image_used[i] = true;
            chosen.push((s, i));
        }
    }
    chosen.sort_by(|a, b| scans[a.0].1.total_cmp(&scans[b.0].1).then_with(|| scans[a.0].0.cmp(&scans[b.0].0)));
    chosen
        .into_iter()
        .map(|(s, i)| SyncPair {
            scan_id: scans[s].0.clone(),
            image_id: images[i].0.clone(),
            dt: images[i].1 - scans[s].1,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn stamps(v: &[(&str, f64)]) -> Vec<(String, f64)> {
        v.iter().map(|(id, t)| (id.to_string(), *t)).collect()
    }

    #[test]
    fn single_candidate_under_gate() {
        let pairs = sync_pairs(
            &stamps(&[("s0", 10.000)]),
            &stamps(&[("i0", 10.004), ("i1", 10.020)]),
            0.010,
        );
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].image_id, "i0");
        assert!((pairs[0].dt - 0.004).abs() < 1e-12);
    }

    #[test]
    fn gate_exceeded() {
        let pairs = sync_pairs(&stamps(&[("s0", 10.000)]), &stamps(&[("i0", 10.012)]), 0.010);
        assert!(pairs.is_empty());
    }

    #[test]
    fn gate_is_strict() {
        let pairs = sync_pairs(&stamps(&[("s0", 0.5)]), &stamps(&[("i0", 0.625)]), 0.125);
        assert!(pairs.is_empty());
    }

    #[test]
    fn image_used_once() {
        // both scans want i0; s1 is closer and wins, s0 falls back to i1
        let pairs = sync_pairs(
            &stamps(&[("s0", 1.000), ("s1", 1.006)]),
            &stamps(&[("i0", 1.005), ("i1", 0.993)]),
            0.010,
        );
        assert_eq!(pairs.len(), 2);
        assert_eq!((pairs[0].scan_id.as_str(), pairs[0].image_id.as_str()), ("s0", "i1"));
        assert_eq!((pairs[1].scan_id.as_str(), pairs[1].image_id.as_str()), ("s1", "i0"));
    }

    #[test]
    fn tie_broken_by_scan_id() {
        let pairs = sync_pairs(&stamps(&[("b", 1.5), ("a", 0.5)]), &stamps(&[("i", 1.0)]), 0.6);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].scan_id, "a");
    }

    #[test]
    fn output_sorted_by_scan_time() {
        let pairs = sync_pairs(
            &stamps(&[("late", 2.0), ("early", 1.0)]),
            &stamps(&[("x", 2.001), ("y", 0.999)]),
            0.010,
        );
        let ids: Vec<_> = pairs.iter().map(|p| p.scan_id.as_str()).collect();
        assert_eq!(ids, vec!["early", "late"]);
    }
}
