use serde::{Deserialize, Serialize};

use super::canny::{canny, CannyParams};
use super::segment::{apply_mask, segment_grain};
use super::transform::{resize, to_channels};
use super::Image;
use crate::error::Result;

/// Per-image preprocessing applied before normalisation.
///
/// Order: resize → (optional) grain segmentation → (optional) Canny edge map
/// → channel adaptation. An edge map is replicated across the target channels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    #[serde(default)]
    pub segment: bool,
    #[serde(default)]
    pub canny: Option<CannyParams>,
}

impl Pipeline {
    pub fn new(width: usize, height: usize, channels: usize) -> Self {
        Self {
            width,
            height,
            channels,
            segment: false,
            canny: None,
        }
    }

    pub fn apply(&self, image: &Image) -> Result<Image> {
        let mut img = resize(image, self.width, self.height)?;
        if self.segment {
            let mask = segment_grain(&img)?;
            img = apply_mask(&img, &mask)?;
        }
        if let Some(params) = self.canny {
            img = canny(&img, params)?.to_image();
        }
        to_channels(&img, self.channels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_pipeline_resizes_and_adapts_channels() {
        let gray = Image::filled(80, 60, &[40]).unwrap();
        let out = Pipeline::new(50, 50, 3).apply(&gray).unwrap();
        assert_eq!((out.width(), out.height(), out.channels()), (50, 50, 3));
        assert!(out.pixels().iter().all(|&v| v == 40));
    }

    #[test]
    fn optional_stages_run() {
        let img = Image::from_fn(40, 40, 3, |x, y, _| {
            if (10..30).contains(&x) && (12..28).contains(&y) {
                220
            } else {
                10
            }
        })
        .unwrap();
        let mut p = Pipeline::new(40, 40, 3);
        p.segment = true;
        let seg = p.apply(&img).unwrap();
        assert_eq!(seg.pixel(0, 0), &[0, 0, 0]);
        p.canny = Some(CannyParams::default());
        let edges = p.apply(&img).unwrap();
        assert!(edges.pixels().iter().all(|&v| v == 0 || v == 255));
        assert!(edges.pixels().contains(&255));
    }
}
