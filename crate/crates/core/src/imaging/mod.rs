//! 8-bit rasters and the preprocessing chain.

mod canny;
mod filters;
mod pipeline;
mod pnm;
mod segment;
mod transform;

pub use canny::{canny, sobel_nms, CannyParams, EdgeMap, Gradients};
pub use filters::{gaussian_blur, gaussian_blur_plane, gaussian_kernel, to_grayscale, GrayPlane};
pub use pipeline::Pipeline;
pub use pnm::{decode_pnm, encode_pnm, read_image, write_image};
pub use segment::{
    apply_mask, largest_component, otsu_threshold, segment_grain, SegmentMask,
};
pub use transform::{
    augment, flip_horizontal, flip_vertical, normalize, resize, rotate180, rotate90, to_channels,
};

use crate::error::{Error, Result};

/// Row-major raster with interleaved channels (1 = gray, 3 = RGB).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension(format!("image size {width}×{height}")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::Dimension(format!(
                "image channel count {channels}, expected 1 or 3"
            )));
        }
        if pixels.len() != width * height * channels {
            return Err(Error::Dimension(format!(
                "{width}×{height}×{channels} image needs {} bytes, got {}",
                width * height * channels,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, color: &[u8]) -> Result<Self> {
        let pixels = color.repeat(width * height);
        Self::new(width, height, color.len(), pixels)
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> u8,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    pixels.push(f(x, y, c));
                }
            }
        }
        Self::new(width, height, channels, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn is_square(&self) -> bool {
        self.width == self.height
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let o = (y * self.width + x) * self.channels;
        &self.pixels[o..o + self.channels]
    }

    pub fn pixel_mut(&mut self, x: usize, y: usize) -> &mut [u8] {
        let o = (y * self.width + x) * self.channels;
        &mut self.pixels[o..o + self.channels]
    }

    /// Per-channel mean, rounded.
    pub fn mean_color(&self) -> Vec<u8> {
        let n = (self.width * self.height) as u64;
        (0..self.channels)
            .map(|c| {
                let sum: u64 = self
                    .pixels
                    .iter()
                    .skip(c)
                    .step_by(self.channels)
                    .map(|&v| u64::from(v))
                    .sum();
                ((sum + n / 2) / n) as u8
            })
            .collect()
    }
}
