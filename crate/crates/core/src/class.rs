//! Class taxonomy used throughout the crate.
//!
//! Ids 1..=9 are the LiDAR classes in a fixed order, 0 is `UNLABELED`.
//! Image segmentation also produces classes that have no 3D counterpart
//! (`SKY`, `BACKGROUND`); those may appear in label images but never in a
//! [`LabelArray`](crate::LabelArray).

use core::fmt;

use serde::{Deserialize, Serialize};

/// Number of LiDAR classes, i.e. the width of a prediction row.
pub const N_CLASSES: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassId(pub u16);

impl ClassId {
    pub const UNLABELED: ClassId = ClassId(0);
    pub const ON_TRACKS: ClassId = ClassId(1);
    pub const PERSON: ClassId = ClassId(2);
    pub const RAIL_TRACK: ClassId = ClassId(3);
    pub const TRACKBED: ClassId = ClassId(4);
    pub const CONSTRUCTION: ClassId = ClassId(5);
    pub const POLE: ClassId = ClassId(6);
    pub const SIGN: ClassId = ClassId(7);
    pub const VEGETATION: ClassId = ClassId(8);
    pub const TERRAIN: ClassId = ClassId(9);
    pub const SKY: ClassId = ClassId(10);
    pub const BACKGROUND: ClassId = ClassId(11);

    /// True for the nine classes that exist in point clouds.
    pub fn is_3d(self) -> bool {
        (1..=N_CLASSES as u16).contains(&self.0)
    }

    /// Valid in a `LabelArray`: a 3D class or `UNLABELED`.
    pub fn is_point_label(self) -> bool {
        self.0 as usize <= N_CLASSES
    }

    /// Zero-based column of a 3D class in predictions and confusion matrices.
    pub fn index(self) -> Option<usize> {
        self.is_3d().then(|| self.0 as usize - 1)
    }

    pub fn from_index(index: usize) -> ClassId {
        debug_assert!(index < N_CLASSES);
        ClassId(index as u16 + 1)
    }

    /// All 3D classes in id order.
    pub fn all_3d() -> impl Iterator<Item = ClassId> {
        (1..=N_CLASSES as u16).map(ClassId)
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match ClassSet::railway().get(*self) {
            Some(info) => f.write_str(info.name),
            None => write!(f, "class#{}", self.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClassInfo {
    pub id: ClassId,
    pub name: &'static str,
    pub is_3d: bool,
}

const fn info(id: u16, name: &'static str, is_3d: bool) -> ClassInfo {
    ClassInfo {
        id: ClassId(id),
        name,
        is_3d,
    }
}

static RAILWAY: [ClassInfo; 12] = [
    info(0, "UNLABELED", false),
    info(1, "ON_TRACKS", true),
    info(2, "PERSON", true),
    info(3, "RAIL_TRACK", true),
    info(4, "TRACKBED", true),
    info(5, "CONSTRUCTION", true),
    info(6, "POLE", true),
    info(7, "SIGN", true),
    info(8, "VEGETATION", true),
    info(9, "TERRAIN", true),
    info(10, "SKY", false),
    info(11, "BACKGROUND", false),
];

/// Ordered class table. Only one taxonomy exists; the type keeps lookups
/// and validation in one place.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassSet {
    classes: &'static [ClassInfo],
}

impl ClassSet {
    pub fn railway() -> Self {
        ClassSet { classes: &RAILWAY }
    }

    pub fn classes(&self) -> &'static [ClassInfo] {
        self.classes
    }

    pub fn get(&self, id: ClassId) -> Option<&'static ClassInfo> {
        self.classes.iter().find(|c| c.id == id)
    }

    pub fn by_name(&self, name: &str) -> Option<ClassId> {
        self.classes.iter().find(|c| c.name == name).map(|c| c.id)
    }

    pub fn contains(&self, id: ClassId) -> bool {
        self.get(id).is_some()
    }

    pub fn n_3d(&self) -> usize {
        self.classes.iter().filter(|c| c.is_3d).count()
    }
}

impl Default for ClassSet {
    fn default() -> Self {
        Self::railway()
    }
}
