//! Indexed-colour PNG rendering of label images. Pixel values stay class
//! ids; the palette only decides how they look.

use railseg_core::transfer::LabelImage;

use crate::{Error, Result};

/// RGB colour per class id, `UNLABELED` through `BACKGROUND`.
pub const CLASS_COLORS: [[u8; 3]; 12] = [
    [0, 0, 0],
    [230, 25, 75],
    [255, 0, 200],
    [120, 120, 120],
    [170, 140, 100],
    [70, 70, 160],
    [250, 190, 30],
    [255, 225, 25],
    [60, 180, 75],
    [150, 210, 100],
    [70, 130, 180],
    [40, 40, 40],
];

pub fn encode_png(image: &LabelImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut enc = png::Encoder::new(&mut out, image.width(), image.height());
    enc.set_color(png::ColorType::Indexed);
    enc.set_depth(png::BitDepth::Eight);
    enc.set_palette(CLASS_COLORS.concat());
    let mut writer = enc.write_header().map_err(|e| Error::Png(e.to_string()))?;
    writer
        .write_image_data(image.pixels())
        .map_err(|e| Error::Png(e.to_string()))?;
    writer.finish().map_err(|e| Error::Png(e.to_string()))?;
    Ok(out)
}
