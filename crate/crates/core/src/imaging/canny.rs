use std::collections::VecDeque;

use super::filters::{gaussian_blur_plane, to_grayscale, GrayPlane};
use super::Image;
use crate::error::{Error, Result};

/// Thresholds are on the Sobel magnitude of 0..255 intensities.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CannyParams {
    pub sigma: f64,
    pub low: f64,
    pub high: f64,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            low: 50.0,
            high: 100.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeMap {
    pub width: usize,
    pub height: usize,
    pub edges: Vec<bool>,
}

impl EdgeMap {
    pub fn is_edge(&self, x: usize, y: usize) -> bool {
        self.edges[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.edges.iter().filter(|&&e| e).count()
    }

    /// White edges on black.
    pub fn to_image(&self) -> Image {
        let pixels = self.edges.iter().map(|&e| if e { 255 } else { 0 }).collect();
        Image::new(self.width, self.height, 1, pixels).expect("edge map dimensions")
    }
}

/// Intermediate Canny products, exposed for inspection and tests.
#[derive(Clone, Debug)]
pub struct Gradients {
    pub magnitude: Vec<f64>,
    /// Direction bin: 0 → 0°, 1 → 45°, 2 → 90°, 3 → 135°.
    pub direction: Vec<u8>,
    /// Magnitude after non-maximum suppression (0 where suppressed).
    pub suppressed: Vec<f64>,
}

/// Sobel gradients of an (already smoothed) plane with non-maximum suppression.
pub fn sobel_nms(plane: &GrayPlane) -> Gradients {
    let (w, h) = (plane.width, plane.height);
    let mut magnitude = vec![0.0; w * h];
    let mut direction = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            let p = |dx: isize, dy: isize| plane.clamped(x as isize + dx, y as isize + dy);
            let gx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            let gy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            magnitude[y * w + x] = (gx * gx + gy * gy).sqrt();
            let mut angle = gy.atan2(gx).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            direction[y * w + x] = if !(22.5..157.5).contains(&angle) {
                0
            } else if angle < 67.5 {
                1
            } else if angle < 112.5 {
                2
            } else {
                3
            };
        }
    }
    // neighbour offsets along the gradient (y grows downwards)
    const STEP: [(isize, isize); 4] = [(1, 0), (1, 1), (0, 1), (-1, 1)];
    let mag_at = |x: isize, y: isize| -> f64 {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            magnitude[y as usize * w + x as usize]
        }
    };
    let mut suppressed = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let m = magnitude[y * w + x];
            if m == 0.0 {
                continue;
            }
            let (sx, sy) = STEP[direction[y * w + x] as usize];
            let (xi, yi) = (x as isize, y as isize);
            let before = mag_at(xi - sx, yi - sy);
            let after = mag_at(xi + sx, yi + sy);
            // asymmetric comparison: of two equal ridge pixels exactly one survives
            if m >= before && m > after {
                suppressed[y * w + x] = m;
            }
        }
    }
    Gradients {
        magnitude,
        direction,
        suppressed,
    }
}

pub fn canny(image: &Image, params: CannyParams) -> Result<EdgeMap> {
    let CannyParams { sigma, low, high } = params;
    if !(low >= 0.0 && low < high) {
        return Err(Error::Parameter(format!(
            "canny thresholds need 0 ≤ low < high, got low={low} high={high}"
        )));
    }
    let plane = GrayPlane::from_image(&to_grayscale(image))?;
    let blurred = gaussian_blur_plane(&plane, sigma)?;
    let grads = sobel_nms(&blurred);
    let (w, h) = (plane.width, plane.height);
    let mut edges = vec![false; w * h];
    let mut queue: VecDeque<usize> = grads
        .suppressed
        .iter()
        .enumerate()
        .filter(|(_, &m)| m >= high)
        .map(|(i, _)| i)
        .collect();
    for &i in &queue {
        edges[i] = true;
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !edges[j] && grads.suppressed[j] >= low {
                    edges[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    Ok(EdgeMap {
        width: w,
        height: h,
        edges,
    })
}
