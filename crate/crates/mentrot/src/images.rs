//! PNG encoding of raster images and atlas sheets.

use std::fs;
use std::path::Path;

use mentrot_core::image::{AlphaMask, RasterImage};

use crate::error::{Error, Result};

pub fn encode_png(img: &RasterImage) -> Vec<u8> {
    assert!(img.is_consistent(), "inconsistent raster");
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, img.width, img.height);
        enc.set_color(if img.channels == 1 { png::ColorType::Grayscale } else { png::ColorType::Rgb });
        enc.set_depth(png::BitDepth::Eight);
        enc.set_compression(png::Compression::Default);
        enc.set_filter(png::FilterType::Sub);
        let mut w = enc.write_header().expect("in-memory PNG header");
        w.write_image_data(&img.data).expect("in-memory PNG data");
    }
    out
}

/// 8-bit pixels of a PNG after palette expansion and 16-bit stripping.
struct Decoded {
    width: u32,
    height: u32,
    color: png::ColorType,
    data: Vec<u8>,
}

fn decode_raw(bytes: &[u8]) -> std::result::Result<Decoded, png::DecodingError> {
    let mut dec = png::Decoder::new(bytes);
    dec.set_transformations(png::Transformations::normalize_to_color8());
    let mut reader = dec.read_info()?;
    let mut buf = vec![0; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf)?;
    buf.truncate(info.buffer_size());
    Ok(Decoded {
        width: info.width,
        height: info.height,
        color: info.color_type,
        data: buf,
    })
}

/// Decodes to gray or RGB; alpha is dropped.
pub fn decode_png(bytes: &[u8]) -> std::result::Result<RasterImage, png::DecodingError> {
    let d = decode_raw(bytes)?;
    let (channels, data) = match d.color {
        png::ColorType::Grayscale => (1, d.data),
        png::ColorType::GrayscaleAlpha => (1, d.data.chunks_exact(2).map(|p| p[0]).collect()),
        png::ColorType::Rgb => (3, d.data),
        png::ColorType::Rgba => (3, d.data.chunks_exact(4).flat_map(|p| [p[0], p[1], p[2]]).collect()),
        png::ColorType::Indexed => unreachable!("palette is expanded"),
    };
    Ok(RasterImage {
        width: d.width,
        height: d.height,
        channels,
        data,
    })
}

/// Coverage mask of an atlas sheet: the alpha channel when present,
/// otherwise dark ink on a light page (`255 - luma`).
pub fn decode_alpha_sheet(bytes: &[u8]) -> std::result::Result<AlphaMask, png::DecodingError> {
    let d = decode_raw(bytes)?;
    let mut mask = AlphaMask::new(d.width, d.height);
    let n = d.width as usize * d.height as usize;
    for i in 0..n {
        let v = match d.color {
            png::ColorType::Grayscale => 255 - d.data[i],
            png::ColorType::GrayscaleAlpha => d.data[2 * i + 1],
            png::ColorType::Rgb => {
                let p = &d.data[3 * i..3 * i + 3];
                255 - luma(p[0], p[1], p[2])
            }
            png::ColorType::Rgba => d.data[4 * i + 3],
            png::ColorType::Indexed => unreachable!("palette is expanded"),
        };
        mask.set((i % d.width as usize) as u32, (i / d.width as usize) as u32, v);
    }
    Ok(mask)
}

fn luma(r: u8, g: u8, b: u8) -> u8 {
    ((299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000) as u8
}

/// Gray+alpha sheet with black ink, the layout atlas tools usually emit.
pub fn encode_alpha_sheet(mask: &AlphaMask) -> Vec<u8> {
    let mut data = Vec::with_capacity(mask.width as usize * mask.height as usize * 2);
    for y in 0..mask.height {
        for x in 0..mask.width {
            data.extend_from_slice(&[0, mask.get(x, y)]);
        }
    }
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, mask.width, mask.height);
        enc.set_color(png::ColorType::GrayscaleAlpha);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc.write_header().expect("in-memory PNG header");
        w.write_image_data(&data).expect("in-memory PNG data");
    }
    out
}

pub fn write_png(path: &Path, img: &RasterImage) -> Result<()> {
    fs::write(path, encode_png(img)).map_err(Error::io(path))
}

pub fn read_png(path: &Path) -> Result<RasterImage> {
    let bytes = fs::read(path).map_err(Error::io(path))?;
    decode_png(&bytes).map_err(|e| Error::format(path, e))
}
