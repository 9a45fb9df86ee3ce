//! Semantic label images from the 2D segmentation network.
//!
//! On disk a label image is a binary PGM (`P5`, maxval 255) whose pixel
//! values are class ids. Images produced with a different taxonomy are
//! translated with a [`ClassMap`] on load.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{ClassId, ClassSet, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl LabelImage {
    /// Row-major pixel ids; every id must be declared in the class set.
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width as usize * height as usize {
            return Err(Error::LengthMismatch {
                expected: width as usize * height as usize,
                found: pixels.len(),
            });
        }
        let classes = ClassSet::railway();
        if let Some(i) = pixels.iter().position(|&p| !classes.contains(ClassId(p as u16))) {
            return Err(Error::UnknownClass {
                index: i,
                id: pixels[i] as u32,
            });
        }
        Ok(LabelImage { width, height, pixels })
    }

    pub fn filled(width: u32, height: u32, class: ClassId) -> Result<Self> {
        Self::new(width, height, vec![class.0 as u8; width as usize * height as usize])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, col: u32, row: u32) -> ClassId {
        ClassId(self.pixels[row as usize * self.width as usize + col as usize] as u16)
    }

    /// Decodes a PGM and maps raw values through `map`.
    pub fn from_pgm(bytes: &[u8], map: &ClassMap) -> Result<Self> {
        let (width, height, raw) = decode_pgm(bytes)?;
        let pixels = raw
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                map.get(v).map(|c| c.0 as u8).ok_or(Error::UnknownClass {
                    index: i,
                    id: v as u32,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(width, height, pixels)
    }

    pub fn to_pgm(&self) -> Vec<u8> {
        encode_pgm(self.width, self.height, &self.pixels)
    }

    /// True when some pixel within Chebyshev distance `radius` of `(col, row)`
    /// carries a different class.
    pub fn near_boundary(&self, col: u32, row: u32, radius: u32) -> bool {
        let c = self.get(col, row);
        let r0 = row.saturating_sub(radius);
        let r1 = (row + radius).min(self.height - 1);
        let c0 = col.saturating_sub(radius);
        let c1 = (col + radius).min(self.width - 1);
        (r0..=r1).any(|r| (c0..=c1).any(|cc| self.get(cc, r) != c))
    }
}

pub fn encode_pgm(width: u32, height: u32, pixels: &[u8]) -> Vec<u8> {
    let mut out: Vec<u8> = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// Parses a binary 8-bit PGM, returning `(width, height, pixels)`.
pub fn decode_pgm(bytes: &[u8]) -> Result<(u32, u32, Vec<u8>)> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(Error::Pgm("missing P5 magic"));
    }
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for f in fields.iter_mut() {
        // whitespace and `#` comments may separate header fields
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| b.is_ascii_digit()) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Pgm("expected a header number"));
        }
        let text = core::str::from_utf8(&bytes[start..pos]).map_err(|_| Error::Pgm("bad header"))?;
        *f = text.parse().map_err(|_| Error::Pgm("header number overflows"))?;
    }
    if !bytes.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
        return Err(Error::Pgm("expected whitespace after maxval"));
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(Error::Pgm("only maxval 255 is supported"));
    }
    let n = width as usize * height as usize;
    let data = &bytes[pos..];
    if data.len() != n {
        return Err(Error::Pgm("pixel payload does not match the header"));
    }
    Ok((width, height, data.to_vec()))
}

/// Translation table from raw label-image values to class ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ClassMapEntry>", into = "Vec<ClassMapEntry>")]
pub struct ClassMap {
    table: [Option<ClassId>; 256],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassMapEntry {
    pub raw: u8,
    pub class: String,
}

impl ClassMap {
    /// Raw values already are class ids.
    pub fn identity() -> Self {
        let mut table = [None; 256];
        for c in ClassSet::railway().classes() {
            table[c.id.0 as usize] = Some(c.id);
        }
        ClassMap { table }
    }

    /// Default for networks trained on RailSem19 (19 classes in the order of
    /// its `rs19-config.json`, 255 = void).
    pub fn railsem19() -> Self {
        const RS19: [(u8, ClassId); 20] = [
            (0, ClassId::TERRAIN),        // road
            (1, ClassId::TERRAIN),        // sidewalk
            (2, ClassId::CONSTRUCTION),   // construction
            (3, ClassId::RAIL_TRACK),     // tram-track
            (4, ClassId::CONSTRUCTION),   // fence
            (5, ClassId::POLE),           // pole
            (6, ClassId::SIGN),           // traffic-light
            (7, ClassId::SIGN),           // traffic-sign
            (8, ClassId::VEGETATION),     // vegetation
            (9, ClassId::TERRAIN),        // terrain
            (10, ClassId::SKY),           // sky
            (11, ClassId::PERSON),        // human
            (12, ClassId::RAIL_TRACK),    // rail-track
            (13, ClassId::BACKGROUND),    // car
            (14, ClassId::BACKGROUND),    // truck
            (15, ClassId::TRACKBED),      // trackbed
            (16, ClassId::ON_TRACKS),     // on-rails
            (17, ClassId::RAIL_TRACK),    // rail-raised
            (18, ClassId::RAIL_TRACK),    // rail-embedded
            (255, ClassId::BACKGROUND),   // void
        ];
        let mut table = [None; 256];
        for (raw, class) in RS19 {
            table[raw as usize] = Some(class);
        }
        ClassMap { table }
    }

    pub fn get(&self, raw: u8) -> Option<ClassId> {
        self.table[raw as usize]
    }

    pub fn insert(&mut self, raw: u8, class: ClassId) -> Result<()> {
        if !ClassSet::railway().contains(class) {
            return Err(Error::UnknownClass {
                index: raw as usize,
                id: class.0 as u32,
            });
        }
        self.table[raw as usize] = Some(class);
        Ok(())
    }
}

impl Default for ClassMap {
    fn default() -> Self {
        Self::identity()
    }
}

impl TryFrom<Vec<ClassMapEntry>> for ClassMap {
    type Error = String;

    fn try_from(entries: Vec<ClassMapEntry>) -> core::result::Result<Self, String> {
        let classes = ClassSet::railway();
        let mut map = ClassMap { table: [None; 256] };
        for e in entries {
            let id = classes
                .by_name(&e.class)
                .ok_or_else(|| format!("unknown class name `{}`", e.class))?;
            map.table[e.raw as usize] = Some(id);
        }
        Ok(map)
    }
}

impl From<ClassMap> for Vec<ClassMapEntry> {
    fn from(map: ClassMap) -> Self {
        let classes = ClassSet::railway();
        map.table
            .iter()
            .enumerate()
            .filter_map(|(raw, c)| {
                c.map(|c| ClassMapEntry {
                    raw: raw as u8,
                    class: String::from(classes.get(c).map(|i| i.name).unwrap_or("UNLABELED")),
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_round_trip_with_comment() {
        let img = LabelImage::new(3, 2, vec![1, 2, 3, 10, 11, 0]).unwrap();
        let bytes = img.to_pgm();
        assert_eq!(LabelImage::from_pgm(&bytes, &ClassMap::identity()).unwrap(), img);

        let mut commented = b"P5\n# made by hand\n3 2\n255\n".to_vec();
        commented.extend_from_slice(&[1, 2, 3, 10, 11, 0]);
        assert_eq!(LabelImage::from_pgm(&commented, &ClassMap::identity()).unwrap(), img);
    }

    #[test]
    fn pgm_errors() {
        assert!(decode_pgm(b"P6\n1 1\n255\n\0").is_err());
        assert!(decode_pgm(b"P5\n2 2\n255\n\0").is_err());
        assert!(decode_pgm(b"P5\n1 1\n65535\n\0\0").is_err());
    }

    #[test]
    fn undeclared_pixel_rejected() {
        assert!(matches!(
            LabelImage::new(2, 1, vec![1, 200]),
            Err(Error::UnknownClass { index: 1, id: 200 })
        ));
    }

    #[test]
    fn railsem_mapping() {
        let map = ClassMap::railsem19();
        let bytes = encode_pgm(4, 1, &[12, 10, 16, 255]);
        let img = LabelImage::from_pgm(&bytes, &map).unwrap();
        assert_eq!(img.get(0, 0), ClassId::RAIL_TRACK);
        assert_eq!(img.get(1, 0), ClassId::SKY);
        assert_eq!(img.get(2, 0), ClassId::ON_TRACKS);
        assert_eq!(img.get(3, 0), ClassId::BACKGROUND);
        // 19 is not part of the table
        assert!(LabelImage::from_pgm(&encode_pgm(1, 1, &[19]), &map).is_err());
    }

    #[test]
    fn class_map_serde_entries() {
        let entries: Vec<ClassMapEntry> = ClassMap::railsem19().into();
        assert_eq!(entries.len(), 20);
        assert_eq!(ClassMap::try_from(entries).unwrap(), ClassMap::railsem19());
        let bad = vec![ClassMapEntry {
            raw: 1,
            class: String::from("TRAIN"),
        }];
        assert!(ClassMap::try_from(bad).is_err());
    }

    #[test]
    fn boundary_neighbourhood() {
        let mut px = vec![9u8; 10 * 10];
        px[5 * 10 + 5] = 8;
        let img = LabelImage::new(10, 10, px).unwrap();
        assert!(img.near_boundary(5, 5, 1));
        assert!(img.near_boundary(2, 2, 3));
        assert!(!img.near_boundary(1, 1, 3));
        assert!(!img.near_boundary(9, 0, 3));
    }
}
