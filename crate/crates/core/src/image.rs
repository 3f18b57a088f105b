//! Owned 8-bit raster buffers.

use alloc::vec;
use alloc::vec::Vec;

/// Row-major 8-bit image with 1 (gray) or 3 (RGB) channels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RasterImage {
    pub width: u32,
    pub height: u32,
    pub channels: u8,
    pub data: Vec<u8>,
}

impl RasterImage {
    pub fn filled(width: u32, height: u32, channels: u8, value: u8) -> Self {
        assert!(channels == 1 || channels == 3, "channels must be 1 or 3");
        Self {
            width,
            height,
            channels,
            data: vec![value; width as usize * height as usize * channels as usize],
        }
    }

    /// Expands a single-channel image into gray RGB.
    pub fn gray_to_rgb(gray: &[u8], width: u32, height: u32) -> Self {
        assert_eq!(gray.len(), width as usize * height as usize);
        let mut data = Vec::with_capacity(gray.len() * 3);
        for &g in gray {
            data.extend_from_slice(&[g, g, g]);
        }
        Self {
            width,
            height,
            channels: 3,
            data,
        }
    }

    pub fn is_consistent(&self) -> bool {
        (self.channels == 1 || self.channels == 3)
            && self.data.len() == self.width as usize * self.height as usize * self.channels as usize
    }

    /// First channel of pixel `(x, y)`.
    #[inline]
    pub fn luma(&self, x: u32, y: u32) -> u8 {
        self.data[(y as usize * self.width as usize + x as usize) * self.channels as usize]
    }

    /// Fraction of pixels whose first channel equals `value`.
    pub fn fraction_equal(&self, value: u8) -> f64 {
        let n = self.width as usize * self.height as usize;
        let hits = (0..n)
            .filter(|i| self.data[i * self.channels as usize] == value)
            .count();
        hits as f64 / n as f64
    }

    /// Mirror left-right.
    pub fn flipped_horizontal(&self) -> Self {
        let (w, h, c) = (self.width as usize, self.height as usize, self.channels as usize);
        let mut out = self.clone();
        for y in 0..h {
            for x in 0..w {
                let src = (y * w + x) * c;
                let dst = (y * w + (w - 1 - x)) * c;
                out.data[dst..dst + c].copy_from_slice(&self.data[src..src + c]);
            }
        }
        out
    }
}

/// Single-channel coverage mask (0 = empty, 255 = full ink).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AlphaMask {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

impl AlphaMask {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            data: vec![0; width as usize * height as usize],
        }
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: u8) {
        let w = self.width as usize;
        self.data[y as usize * w + x as usize] = v;
    }

    /// Left-right reflection.
    pub fn mirrored(&self) -> Self {
        let mut out = Self::new(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                out.set(self.width - 1 - x, y, self.get(x, y));
            }
        }
        out
    }

    pub fn ink(&self) -> u64 {
        self.data.iter().map(|&v| v as u64).sum()
    }
}
