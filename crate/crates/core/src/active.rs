//! Active-learning scan selection.
//!
//! Each unlabeled scan is scored twice from the current network's softmax
//! output: by its mean normalized per-point entropy (diversity) and by its
//! mean per-point uncertainty `1 - max_c p_c`. Scans are ranked by each score
//! separately (rank 1 = highest score), the two ranks are summed and the scans
//! with the smallest sum are sent to annotation.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::prediction::ROW_SUM_TOLERANCE;
use crate::{Error, PredictionMatrix, Result};

/// Default number of scans sent to annotation per iteration.
pub const DEFAULT_BATCH: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanScore {
    pub scan_id: String,
    pub mean_entropy: f64,
    pub mean_uncertainty: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedScan {
    pub scan_id: String,
    pub rank_h: usize,
    pub rank_u: usize,
    /// `rank_h + rank_u`.
    pub rank_sum: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub iteration: u32,
    /// All candidates in selection order.
    pub ranked: Vec<RankedScan>,
    pub selected: Vec<String>,
}

fn check_simplex<T: Copy + Into<f64>>(probs: &[T]) -> Result<()> {
    let mut sum = 0.0;
    for &p in probs {
        let p: f64 = p.into();
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidSimplex { sum: f64::NAN });
        }
        sum += p;
    }
    if probs.len() < 2 || (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(Error::InvalidSimplex { sum });
    }
    Ok(())
}

/// Shannon entropy in bits divided by `log2(N)`, clamped to `[0, 1]`.
pub fn point_entropy<T: Copy + Into<f64>>(probs: &[T]) -> Result<f64> {
    check_simplex(probs)?;
    let h: f64 = probs
        .iter()
        .map(|&p| {
            let p: f64 = p.into();
            if p > 0.0 {
                -p * libm::log2(p)
            } else {
                0.0
            }
        })
        .sum();
    Ok((h / libm::log2(probs.len() as f64)).clamp(0.0, 1.0))
}

/// `1 - max_c p_c`: zero for a one-hot row, `1 - 1/N` for a uniform one.
pub fn point_uncertainty<T: Copy + Into<f64>>(probs: &[T]) -> Result<f64> {
    check_simplex(probs)?;
    let max = probs.iter().map(|&p| p.into()).fold(0.0f64, f64::max);
    Ok((1.0 - max).clamp(0.0, 1.0))
}

pub fn score_scan(pred: &PredictionMatrix) -> Result<ScanScore> {
    let n = pred.n_points();
    if n == 0 {
        return Err(Error::EmptyPredictions(String::from(pred.scan_id())));
    }
    let (mut h, mut u) = (0.0, 0.0);
    for row in pred.rows() {
        h += point_entropy(row)?;
        u += point_uncertainty(row)?;
    }
    Ok(ScanScore {
        scan_id: String::from(pred.scan_id()),
        mean_entropy: h / n as f64,
        mean_uncertainty: u / n as f64,
        n_points: n,
    })
}

/// Rank-sum ordering of scored scans.
///
/// Within each score, higher is better (rank 1) and equal scores fall back to
/// ascending scan id, so ranks are a permutation of `1..=m`. Scans are
/// returned by ascending rank sum, then entropy rank, then scan id.
pub fn rank_scans(scores: &[ScanScore]) -> Result<Vec<RankedScan>> {
    let mut ids: Vec<&str> = scores.iter().map(|s| s.scan_id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicateScanId(String::from(w[0])));
    }
    for s in scores {
        if !(s.mean_entropy.is_finite() && s.mean_uncertainty.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "score",
                reason: "scan scores must be finite",
            });
        }
    }

    let ranks = |key: fn(&ScanScore) -> f64| {
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| {
            key(&scores[b])
                .total_cmp(&key(&scores[a]))
                .then_with(|| scores[a].scan_id.cmp(&scores[b].scan_id))
        });
        let mut rank = alloc::vec![0usize; scores.len()];
        for (r, i) in order.into_iter().enumerate() {
            rank[i] = r + 1;
        }
        rank
    };
    let rank_h = ranks(|s| s.mean_entropy);
    let rank_u = ranks(|s| s.mean_uncertainty);

    let mut ranked: Vec<RankedScan> = scores
        .iter()
        .enumerate()
        .map(|(i, s)| RankedScan {
            scan_id: s.scan_id.clone(),
            rank_h: rank_h[i],
            rank_u: rank_u[i],
            rank_sum: rank_h[i] + rank_u[i],
        })
        .collect();
    ranked.sort_by(|a, b| {
        (a.rank_sum, a.rank_h)
            .cmp(&(b.rank_sum, b.rank_h))
            .then_with(|| a.scan_id.cmp(&b.scan_id))
    });
    Ok(ranked)
}

/// Ranks the candidates and keeps the first `n` (all of them when fewer).
pub fn select_top(scores: &[ScanScore], n: usize, iteration: u32) -> Result<SelectionResult> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "must be at least 1",
        });
    }
    let ranked = rank_scans(scores)?;
    let selected = ranked.iter().take(n).map(|r| r.scan_id.clone()).collect();
    Ok(SelectionResult {
        iteration,
        ranked,
        selected,
    })
}

/// Scores every prediction matrix and selects the first `n` scans.
pub fn select_for_labeling(predictions: &[PredictionMatrix], n: usize, iteration: u32) -> Result<SelectionResult> {
    let scores = predictions.iter().map(score_scan).collect::<Result<Vec<_>>>()?;
    select_top(&scores, n, iteration)
}
