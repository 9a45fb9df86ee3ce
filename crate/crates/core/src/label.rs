//! Per-point labels and the `.label` file format.
//!
//! One little-endian `u32` per point: bits 0..16 hold the class id, bit 16
//! marks a human-corrected label. Higher bits must be zero.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{ClassId, Error, Result};

const PROVENANCE_BIT: u32 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Provenance {
    /// Transferred from a 2D label image.
    #[default]
    Auto,
    /// Set by a human annotator.
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PointLabel {
    pub class: ClassId,
    pub provenance: Provenance,
}

impl PointLabel {
    pub fn auto(class: ClassId) -> Self {
        PointLabel {
            class,
            provenance: Provenance::Auto,
        }
    }

    pub fn corrected(class: ClassId) -> Self {
        PointLabel {
            class,
            provenance: Provenance::Corrected,
        }
    }

    pub fn to_word(self) -> u32 {
        let flag = match self.provenance {
            Provenance::Auto => 0,
            Provenance::Corrected => PROVENANCE_BIT,
        };
        self.class.0 as u32 | flag
    }

    pub fn from_word(index: usize, raw: u32) -> Result<Self> {
        if raw >> 17 != 0 {
            return Err(Error::MalformedLabel { index, raw });
        }
        let class = ClassId((raw & 0xffff) as u16);
        if !class.is_point_label() {
            return Err(Error::UnknownClass {
                index,
                id: class.0 as u32,
            });
        }
        let provenance = if raw & PROVENANCE_BIT != 0 {
            Provenance::Corrected
        } else {
            Provenance::Auto
        };
        Ok(PointLabel { class, provenance })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LabelArray {
    pub scan_id: String,
    pub labels: Vec<PointLabel>,
}

impl LabelArray {
    pub fn new(scan_id: impl Into<String>, labels: Vec<PointLabel>) -> Self {
        LabelArray {
            scan_id: scan_id.into(),
            labels,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn classes(&self) -> impl Iterator<Item = ClassId> + '_ {
        self.labels.iter().map(|l| l.class)
    }

    pub fn validate(&self) -> Result<()> {
        for (index, l) in self.labels.iter().enumerate() {
            if !l.class.is_point_label() {
                return Err(Error::UnknownClass {
                    index,
                    id: l.class.0 as u32,
                });
            }
        }
        Ok(())
    }

    /// Fails unless the array has exactly `n_points` entries.
    pub fn check_aligned(&self, n_points: usize) -> Result<()> {
        if self.len() != n_points {
            return Err(Error::LengthMismatch {
                expected: n_points,
                found: self.len(),
            });
        }
        Ok(())
    }

    pub fn select(&self, keep: &[bool]) -> Result<LabelArray> {
        self.check_aligned(keep.len())?;
        let labels = self
            .labels
            .iter()
            .zip(keep)
            .filter_map(|(l, &k)| k.then_some(*l))
            .collect();
        Ok(LabelArray::new(self.scan_id.clone(), labels))
    }

    pub fn decode(scan_id: impl Into<String>, bytes: &[u8], expected_len: Option<usize>) -> Result<LabelArray> {
        if bytes.len() % 4 != 0 {
            return Err(Error::Truncated {
                len: bytes.len(),
                record: 4,
            });
        }
        let labels = bytes
            .chunks_exact(4)
            .enumerate()
            .map(|(i, w)| PointLabel::from_word(i, u32::from_le_bytes([w[0], w[1], w[2], w[3]])))
            .collect::<Result<Vec<_>>>()?;
        let out = LabelArray::new(scan_id, labels);
        if let Some(n) = expected_len {
            out.check_aligned(n)?;
        }
        Ok(out)
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        self.validate()?;
        Ok(self.labels.iter().flat_map(|l| l.to_word().to_le_bytes()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn bit_layout() {
        assert_eq!(PointLabel::from_word(0, 0x0000_0003).unwrap(), PointLabel::auto(ClassId(3)));
        assert_eq!(
            PointLabel::from_word(0, 0x0001_0002).unwrap(),
            PointLabel::corrected(ClassId(2))
        );
        assert_eq!(PointLabel::corrected(ClassId(2)).to_word(), 0x0001_0002);
    }

    #[test]
    fn unknown_class_rejected() {
        let bytes = [ClassId::SKY.0 as u32, 3]
            .iter()
            .flat_map(|w| w.to_le_bytes())
            .collect::<Vec<_>>();
        assert_eq!(
            LabelArray::decode("s", &bytes, None),
            Err(Error::UnknownClass { index: 0, id: 10 })
        );
    }

    #[test]
    fn high_bits_rejected() {
        let bytes = 0x0002_0001u32.to_le_bytes();
        assert!(matches!(
            LabelArray::decode("s", &bytes, None),
            Err(Error::MalformedLabel { index: 0, .. })
        ));
    }

    #[test]
    fn length_checked_against_cloud() {
        let bytes = vec![0u8; 12];
        assert_eq!(
            LabelArray::decode("s", &bytes, Some(4)),
            Err(Error::LengthMismatch { expected: 4, found: 3 })
        );
        assert!(LabelArray::decode("s", &bytes, Some(3)).is_ok());
    }
}
