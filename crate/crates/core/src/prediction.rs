//! Per-point softmax output of the segmentation network.
//!
//! File layout: `u32 n_points`, `u32 n_classes` (little-endian), then
//! `n_points * n_classes` little-endian `f32` values in row-major order.

use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result, N_CLASSES};

/// Allowed deviation of a row sum from 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionMatrix {
    scan_id: String,
    probs: Vec<f32>,
}

impl PredictionMatrix {
    /// Builds a matrix from row-major probabilities and validates every row.
    pub fn new(scan_id: impl Into<String>, probs: Vec<f32>) -> Result<Self> {
        if probs.len() % N_CLASSES != 0 {
            return Err(Error::LengthMismatch {
                expected: probs.len().div_ceil(N_CLASSES) * N_CLASSES,
                found: probs.len(),
            });
        }
        for (row, values) in probs.chunks_exact(N_CLASSES).enumerate() {
            check_row(row, values)?;
        }
        Ok(PredictionMatrix {
            scan_id: scan_id.into(),
            probs,
        })
    }

    pub fn scan_id(&self) -> &str {
        &self.scan_id
    }

    pub fn n_points(&self) -> usize {
        self.probs.len() / N_CLASSES
    }

    pub fn n_classes(&self) -> usize {
        N_CLASSES
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.probs[i * N_CLASSES..(i + 1) * N_CLASSES]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> {
        self.probs.chunks_exact(N_CLASSES)
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.probs
    }

    pub fn check_aligned(&self, n_points: usize) -> Result<()> {
        if self.n_points() != n_points {
            return Err(Error::LengthMismatch {
                expected: n_points,
                found: self.n_points(),
            });
        }
        Ok(())
    }

    pub fn select(&self, keep: &[bool]) -> Result<PredictionMatrix> {
        self.check_aligned(keep.len())?;
        let probs = self
            .rows()
            .zip(keep)
            .filter(|(_, &k)| k)
            .flat_map(|(r, _)| r.iter().copied())
            .collect();
        Ok(PredictionMatrix {
            scan_id: self.scan_id.clone(),
            probs,
        })
    }

    pub fn decode(scan_id: impl Into<String>, bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 {
            return Err(Error::HeaderMismatch {
                n_points: 0,
                n_classes: 0,
                payload: bytes.len(),
            });
        }
        let n_points = u32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]) as usize;
        let n_classes = u32::from_le_bytes([bytes[4], bytes[5], bytes[6], bytes[7]]) as usize;
        let payload = &bytes[8..];
        let expected = n_points.checked_mul(n_classes).and_then(|v| v.checked_mul(4));
        if expected != Some(payload.len()) {
            return Err(Error::HeaderMismatch {
                n_points,
                n_classes,
                payload: payload.len(),
            });
        }
        if n_classes != N_CLASSES {
            return Err(Error::ClassCount {
                expected: N_CLASSES,
                found: n_classes,
            });
        }
        let probs = payload
            .chunks_exact(4)
            .map(|w| f32::from_le_bytes([w[0], w[1], w[2], w[3]]))
            .collect();
        PredictionMatrix::new(scan_id, probs)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 4 * self.probs.len());
        out.extend_from_slice(&(self.n_points() as u32).to_le_bytes());
        out.extend_from_slice(&(N_CLASSES as u32).to_le_bytes());
        for p in &self.probs {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out
    }
}

fn check_row(row: usize, values: &[f32]) -> Result<()> {
    let mut sum = 0.0f64;
    for &v in values {
        let v = v as f64;
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::ProbabilityRange { row, value: v });
        }
        sum += v;
    }
    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(Error::RowSum { row, sum });
    }
    Ok(())
}
