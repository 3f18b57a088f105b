//! Atlas file pairs: `{name}.png` plus `{name}.atlas.json`.

use std::fs;
use std::path::{Path, PathBuf};

use mentrot_core::image::AlphaMask;
use mentrot_core::textgen::{AtlasMetrics, GlyphAtlas, GlyphRect};

use crate::error::{write_atomic, Error, Result};
use crate::images::{decode_alpha_sheet, encode_alpha_sheet};

pub fn metrics_path(sheet: &Path) -> PathBuf {
    let stem = sheet.file_stem().and_then(|s| s.to_str()).unwrap_or("atlas");
    sheet.with_file_name(format!("{stem}.atlas.json"))
}

/// Loads an atlas from its PNG sheet; the metrics file sits next to it.
pub fn load_atlas(sheet: &Path) -> Result<GlyphAtlas> {
    let name = sheet.file_stem().and_then(|s| s.to_str()).unwrap_or("atlas").to_owned();
    let png = fs::read(sheet).map_err(Error::io(sheet))?;
    let mask = decode_alpha_sheet(&png).map_err(|e| Error::format(sheet, e))?;
    let mpath = metrics_path(sheet);
    let text = fs::read_to_string(&mpath).map_err(Error::io(&mpath))?;
    let metrics: AtlasMetrics = serde_json::from_str(&text).map_err(|e| Error::format(&mpath, e))?;
    Ok(GlyphAtlas::from_sheet(&name, &mask, &metrics)?)
}

/// Packs an atlas into one sheet row, one pixel of padding per glyph.
pub fn pack_atlas(atlas: &GlyphAtlas) -> (AlphaMask, AtlasMetrics) {
    let width: u32 = atlas.glyphs.values().map(|g| g.mask.width + 1).sum::<u32>().max(1);
    let height = atlas.glyphs.values().map(|g| g.mask.height).max().unwrap_or(1).max(1);
    let mut sheet = AlphaMask::new(width, height);
    let mut metrics = AtlasMetrics {
        glyphs: Default::default(),
        line_height: atlas.line_height,
    };
    let mut x0 = 0;
    for (ch, g) in &atlas.glyphs {
        for y in 0..g.mask.height {
            for x in 0..g.mask.width {
                sheet.set(x0 + x, y, g.mask.get(x, y));
            }
        }
        metrics.glyphs.insert(
            ch.to_string(),
            GlyphRect {
                x: x0,
                y: 0,
                w: g.mask.width,
                h: g.mask.height,
                advance: g.advance,
                bearing_x: g.bearing_x,
                bearing_y: g.bearing_y,
            },
        );
        x0 += g.mask.width + 1;
    }
    (sheet, metrics)
}

/// Writes `{dir}/{name}.png` and its metrics; returns the sheet path.
pub fn save_atlas(dir: &Path, atlas: &GlyphAtlas) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(Error::io(dir))?;
    let (sheet, metrics) = pack_atlas(atlas);
    let png = dir.join(format!("{}.png", atlas.name));
    write_atomic(&png, &encode_alpha_sheet(&sheet))?;
    let json = serde_json::to_string_pretty(&metrics).expect("metrics serialize");
    write_atomic(&metrics_path(&png), json.as_bytes())?;
    Ok(png)
}
