//! Text stimuli: Normal words, Random strings and Pseudo-letter strings,
//! rendered as rotated and optionally mirrored image pairs.
//!
//! A string is composed left-to-right from a [`GlyphAtlas`], cropped to its
//! ink, optionally reflected (which both reverses glyph order and mirrors
//! each glyph), and rotated about the image center with bilinear
//! resampling. Ink is black on white.

pub mod font;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::image::{AlphaMask, RasterImage};
use crate::rng::Rng;

pub const MIN_LEN: usize = 3;
pub const MAX_LEN: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Glyph {
    pub mask: AlphaMask,
    pub advance: i32,
    pub bearing_x: i32,
    /// Offset of the bitmap top below the line top.
    pub bearing_y: i32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlyphAtlas {
    pub name: String,
    pub line_height: u32,
    pub glyphs: BTreeMap<char, Glyph>,
}

/// Placement of one glyph in an atlas sheet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlyphRect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
    pub advance: i32,
    #[serde(default)]
    pub bearing_x: i32,
    #[serde(default)]
    pub bearing_y: i32,
}

/// Metrics half of an atlas file pair (`{name}.atlas.json`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtlasMetrics {
    pub glyphs: BTreeMap<String, GlyphRect>,
    pub line_height: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TextError {
    #[error("the Normal condition needs a word list")]
    WordlistMissing,
    #[error("word list has no lowercase a-z words of length 3-6")]
    EmptyWordlist,
    #[error("empty alphabet")]
    EmptyAlphabet,
    #[error("glyph {0:?} missing from atlas")]
    GlyphMissing(char),
    #[error("atlas key {0:?} is not a single character")]
    BadAtlasKey(String),
    #[error("glyph {0:?} lies outside the atlas sheet")]
    GlyphOutOfSheet(char),
    #[error("string {0:?} renders without ink")]
    NoInk(String),
    #[error("no label-unambiguous string found in {0} draws")]
    AmbiguityBudgetExhausted(u32),
}

impl GlyphAtlas {
    pub fn builtin_latin() -> Self {
        font::latin(4)
    }

    pub fn builtin_pseudo() -> Self {
        font::pseudo(4)
    }

    /// Cuts glyph bitmaps out of an alpha sheet.
    pub fn from_sheet(name: &str, sheet: &AlphaMask, metrics: &AtlasMetrics) -> Result<Self, TextError> {
        let mut glyphs = BTreeMap::new();
        for (key, rect) in &metrics.glyphs {
            let mut chars = key.chars();
            let (Some(ch), None) = (chars.next(), chars.next()) else {
                return Err(TextError::BadAtlasKey(key.clone()));
            };
            if rect.x + rect.w > sheet.width || rect.y + rect.h > sheet.height {
                return Err(TextError::GlyphOutOfSheet(ch));
            }
            let mut mask = AlphaMask::new(rect.w, rect.h);
            for y in 0..rect.h {
                for x in 0..rect.w {
                    mask.set(x, y, sheet.get(rect.x + x, rect.y + y));
                }
            }
            glyphs.insert(
                ch,
                Glyph {
                    mask,
                    advance: rect.advance,
                    bearing_x: rect.bearing_x,
                    bearing_y: rect.bearing_y,
                },
            );
        }
        Ok(Self {
            name: String::from(name),
            line_height: metrics.line_height,
            glyphs,
        })
    }

    pub fn alphabet(&self) -> Vec<char> {
        self.glyphs.keys().copied().collect()
    }

    pub fn check_covers(&self, text: &str) -> Result<(), TextError> {
        match text.chars().find(|c| !self.glyphs.contains_key(c)) {
            Some(c) => Err(TextError::GlyphMissing(c)),
            None => Ok(()),
        }
    }

    /// Composes `text` on one line and crops to the ink bounding box.
    pub fn compose(&self, text: &str) -> Result<AlphaMask, TextError> {
        self.check_covers(text)?;
        let mut pen = 0i32;
        let mut placed = Vec::new();
        let (mut x0, mut y0, mut x1, mut y1) = (i32::MAX, i32::MAX, i32::MIN, i32::MIN);
        for ch in text.chars() {
            let g = &self.glyphs[&ch];
            let (gx, gy) = (pen + g.bearing_x, g.bearing_y);
            for y in 0..g.mask.height {
                for x in 0..g.mask.width {
                    if g.mask.get(x, y) > 0 {
                        x0 = x0.min(gx + x as i32);
                        x1 = x1.max(gx + x as i32);
                        y0 = y0.min(gy + y as i32);
                        y1 = y1.max(gy + y as i32);
                    }
                }
            }
            placed.push((g, gx, gy));
            pen += g.advance;
        }
        if x1 < x0 {
            return Err(TextError::NoInk(String::from(text)));
        }
        let mut out = AlphaMask::new((x1 - x0 + 1) as u32, (y1 - y0 + 1) as u32);
        for (g, gx, gy) in placed {
            for y in 0..g.mask.height {
                for x in 0..g.mask.width {
                    let v = g.mask.get(x, y);
                    if v == 0 {
                        continue;
                    }
                    let (ox, oy) = ((gx + x as i32 - x0) as u32, (gy + y as i32 - y0) as u32);
                    if out.get(ox, oy) < v {
                        out.set(ox, oy, v);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Plain-text word list: one word per line, filtered to lowercase a-z of
/// length 3-6, duplicates dropped, file order kept.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Wordlist {
    words: Vec<String>,
}

impl Wordlist {
    pub fn parse(text: &str) -> Self {
        let mut seen = BTreeSet::new();
        let words = text
            .lines()
            .map(str::trim)
            .filter(|w| (MIN_LEN..=MAX_LEN).contains(&w.len()) && w.bytes().all(|b| b.is_ascii_lowercase()))
            .filter(|w| seen.insert(String::from(*w)))
            .map(String::from)
            .collect();
        Self { words }
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, w: &str) -> bool {
        self.words.iter().any(|x| x == w)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextCondition {
    Normal,
    Random,
    Pseudo,
}

/// Draws one string. Normal picks a word uniformly; Random and Pseudo draw
/// a length uniform in `3..=6` and then i.i.d. uniform characters.
pub fn sample_string(
    condition: TextCondition,
    rng: &mut Rng,
    wordlist: Option<&Wordlist>,
    alphabet: &[char],
) -> Result<String, TextError> {
    match condition {
        TextCondition::Normal => {
            let list = wordlist.ok_or(TextError::WordlistMissing)?;
            if list.is_empty() {
                return Err(TextError::EmptyWordlist);
            }
            Ok(list.words[rng.index(list.len())].clone())
        }
        TextCondition::Random | TextCondition::Pseudo => {
            if alphabet.is_empty() {
                return Err(TextError::EmptyAlphabet);
            }
            let len = rng.range_inclusive(MIN_LEN as u32, MAX_LEN as u32) as usize;
            Ok((0..len).map(|_| alphabet[rng.index(alphabet.len())]).collect())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TextConfig {
    pub size: u32,
    /// Fraction of the frame spanned by the text diagonal, so every
    /// rotation stays inside the image.
    pub fill: f64,
    /// Keep view A at 0 degrees instead of a random rotation.
    pub upright_a: bool,
    pub rotation_min: f64,
    pub rotation_max: f64,
    /// Side of the low-resolution renders used for the ambiguity scan.
    pub ambiguity_size: u32,
    /// Normalized difference below which a reflection counts as a rotation.
    pub ambiguity_threshold: f64,
    pub max_resamples: u32,
}

impl Default for TextConfig {
    fn default() -> Self {
        Self {
            size: 224,
            fill: 0.9,
            upright_a: false,
            rotation_min: 0.0,
            rotation_max: 360.0,
            ambiguity_size: 64,
            ambiguity_threshold: 0.12,
            max_resamples: 200,
        }
    }
}

#[inline]
fn bilinear(mask: &AlphaMask, u: f64, v: f64) -> f64 {
    // Pixel centers sit at integer + 0.5.
    let (x, y) = (u - 0.5, v - 0.5);
    let (fx, fy) = (x.floor(), y.floor());
    let (tx, ty) = (x - fx, y - fy);
    let (ix, iy) = (fx as i64, fy as i64);
    let at = |xx: i64, yy: i64| -> f64 {
        if xx < 0 || yy < 0 || xx >= mask.width as i64 || yy >= mask.height as i64 {
            0.0
        } else {
            mask.get(xx as u32, yy as u32) as f64
        }
    };
    let top = at(ix, iy) * (1.0 - tx) + at(ix + 1, iy) * tx;
    let bottom = at(ix, iy + 1) * (1.0 - tx) + at(ix + 1, iy + 1) * tx;
    top * (1.0 - ty) + bottom * ty
}

/// Maps output pixels of a rotated, centered render back into the canvas.
struct RotatedSampler<'a> {
    canvas: &'a AlphaMask,
    cos: f64,
    sin: f64,
    scale: f64,
    half: f64,
}

impl<'a> RotatedSampler<'a> {
    fn new(canvas: &'a AlphaMask, rotation: f64, size: u32, fill: f64) -> Self {
        let (w, h) = (canvas.width as f64, canvas.height as f64);
        let diag = (w * w + h * h).sqrt();
        let (sin, cos) = libm::sincos(rotation.to_radians());
        Self { canvas, cos, sin, scale: fill * size as f64 / diag, half: size as f64 / 2.0 }
    }

    #[inline]
    fn at(&self, x: u32, y: u32) -> u8 {
        // Screen y grows downward; rotate by -rotation to find the source.
        let px = x as f64 + 0.5 - self.half;
        let py = self.half - (y as f64 + 0.5);
        let qx = self.cos * px + self.sin * py;
        let qy = -self.sin * px + self.cos * py;
        let u = qx / self.scale + self.canvas.width as f64 / 2.0;
        let v = self.canvas.height as f64 / 2.0 - qy / self.scale;
        bilinear(self.canvas, u, v).round().clamp(0.0, 255.0) as u8
    }
}

/// Ink coverage in `[0, 255]` of `canvas` rotated counterclockwise by
/// `rotation` degrees and centered in a `size`×`size` frame.
pub fn rasterize_rotated(canvas: &AlphaMask, rotation: f64, size: u32, fill: f64) -> Vec<u8> {
    let sampler = RotatedSampler::new(canvas, rotation, size, fill);
    let mut out = alloc::vec![0u8; (size * size) as usize];
    for y in 0..size {
        for x in 0..size {
            out[(y * size + x) as usize] = sampler.at(x, y);
        }
    }
    out
}

/// One rendered text view.
pub fn render_text_view(
    canvas: &AlphaMask,
    rotation: f64,
    flipped: bool,
    size: u32,
    fill: f64,
) -> RasterImage {
    let mirrored;
    let src = if flipped {
        mirrored = canvas.mirrored();
        &mirrored
    } else {
        canvas
    };
    let ink = rasterize_rotated(src, rotation, size, fill);
    let gray: Vec<u8> = ink.iter().map(|&a| 255 - a).collect();
    RasterImage::gray_to_rgb(&gray, size, size)
}

/// True when the reflection of `canvas` matches some rotation of it at 1
/// degree steps, i.e. the mirrored label is undefined.
pub fn is_label_ambiguous(canvas: &AlphaMask, cfg: &TextConfig) -> bool {
    let n = cfg.ambiguity_size;
    let base = rasterize_rotated(canvas, 0.0, n, cfg.fill);
    let mass: f64 = base.iter().map(|&v| v as f64).sum();
    if mass == 0.0 {
        return true;
    }
    // Inked pixels first: a wrong rotation usually exceeds the budget there.
    let mut order: Vec<u32> = (0..n * n).filter(|&i| base[i as usize] > 0).collect();
    order.extend((0..n * n).filter(|&i| base[i as usize] == 0));
    let mirrored = canvas.mirrored();
    // Normalized by twice the mass, so a full mismatch scores 1.
    let limit = 2.0 * cfg.ambiguity_threshold * mass;
    (0..360).any(|deg| {
        let cand = RotatedSampler::new(&mirrored, deg as f64, n, cfg.fill);
        let mut diff = 0.0;
        for &i in &order {
            let b = cand.at(i % n, i / n);
            diff += (base[i as usize] as f64 - b as f64).abs();
            if diff > limit {
                return false;
            }
        }
        diff < limit
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextStimulus {
    pub text: String,
    pub condition: TextCondition,
    pub rotation_a: f64,
    pub rotation_b: f64,
    pub flipped: bool,
}

impl TextStimulus {
    pub fn label(&self) -> u8 {
        u8::from(!self.flipped)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TextPair {
    pub a: RasterImage,
    pub b: RasterImage,
    pub label: u8,
    pub stimulus: TextStimulus,
}

/// Draws the rotations (A then B) and the flip coin, then renders both
/// views. `force_flip` overrides the coin after it is drawn.
pub fn render_text_pair_with(
    text: &str,
    condition: TextCondition,
    atlas: &GlyphAtlas,
    rng: &mut Rng,
    cfg: &TextConfig,
    force_flip: Option<bool>,
) -> Result<TextPair, TextError> {
    let canvas = atlas.compose(text)?;
    let rot_a = rng.uniform_range(cfg.rotation_min, cfg.rotation_max);
    let rot_a = if cfg.upright_a { 0.0 } else { rot_a };
    let rot_b = rng.uniform_range(cfg.rotation_min, cfg.rotation_max);
    let coin = rng.coin();
    let flipped = force_flip.unwrap_or(coin);
    let a = render_text_view(&canvas, rot_a, false, cfg.size, cfg.fill);
    let b = render_text_view(&canvas, rot_b, flipped, cfg.size, cfg.fill);
    Ok(TextPair {
        a,
        b,
        label: u8::from(!flipped),
        stimulus: TextStimulus {
            text: String::from(text),
            condition,
            rotation_a: rot_a,
            rotation_b: rot_b,
            flipped,
        },
    })
}

pub fn render_text_pair(
    text: &str,
    atlas: &GlyphAtlas,
    rng: &mut Rng,
    cfg: &TextConfig,
) -> Result<TextPair, TextError> {
    render_text_pair_with(text, TextCondition::Random, atlas, rng, cfg, None)
}

/// Samples strings until one is not label-ambiguous under `atlas`.
/// Returns the string and how many ambiguous draws were skipped.
pub fn sample_unambiguous_string(
    condition: TextCondition,
    rng: &mut Rng,
    wordlist: Option<&Wordlist>,
    atlas: &GlyphAtlas,
    cfg: &TextConfig,
) -> Result<(String, u32), TextError> {
    let alphabet = atlas.alphabet();
    for skipped in 0..cfg.max_resamples {
        let s = sample_string(condition, rng, wordlist, &alphabet)?;
        let canvas = atlas.compose(&s)?;
        if !is_label_ambiguous(&canvas, cfg) {
            return Ok((s, skipped));
        }
    }
    Err(TextError::AmbiguityBudgetExhausted(cfg.max_resamples))
}
