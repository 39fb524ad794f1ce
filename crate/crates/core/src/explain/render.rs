//! Heatmap overlays. Both renderers return RGB images.

use super::SuperpixelMap;
use crate::error::{Error, Result};
use crate::imaging::{to_channels, Image};

const OUTLINE: [u8; 3] = [255, 255, 0];

fn check(image: &Image, superpixels: &SuperpixelMap, per_segment: usize) -> Result<()> {
    if image.width() != superpixels.width || image.height() != superpixels.height {
        return Err(Error::Dimension(format!(
            "image is {}×{} but superpixel map is {}×{}",
            image.width(),
            image.height(),
            superpixels.width,
            superpixels.height
        )));
    }
    if per_segment != superpixels.count {
        return Err(Error::Dimension(format!(
            "{per_segment} values for {} superpixels",
            superpixels.count
        )));
    }
    Ok(())
}

/// Draws a one-pixel yellow outline on the inner boundary of the union of
/// highlighted segments. A pixel is on the boundary when a 4-neighbour lies
/// outside the union or outside the image.
pub fn render_lime(image: &Image, superpixels: &SuperpixelMap, highlighted: &[bool]) -> Result<Image> {
    check(image, superpixels, highlighted.len())?;
    let mut out = to_channels(image, 3)?;
    let (w, h) = (superpixels.width, superpixels.height);
    let inside = |x: usize, y: usize| highlighted[superpixels.labels[y * w + x]];
    for y in 0..h {
        for x in 0..w {
            if !inside(x, y) {
                continue;
            }
            let edge = x == 0
                || y == 0
                || x + 1 == w
                || y + 1 == h
                || !inside(x - 1, y)
                || !inside(x + 1, y)
                || !inside(x, y - 1)
                || !inside(x, y + 1);
            if edge {
                out.pixel_mut(x, y).copy_from_slice(&OUTLINE);
            }
        }
    }
    Ok(out)
}

/// Red for positive and blue for negative attribution, blended with opacity
/// `0.5·|φ|/max|φ|`.
pub fn render_shap(image: &Image, superpixels: &SuperpixelMap, weights: &[f64]) -> Result<Image> {
    check(image, superpixels, weights.len())?;
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::Data("attribution contains non-finite weights".into()));
    }
    let mut out = to_channels(image, 3)?;
    let peak = weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    if peak == 0.0 {
        return Ok(out);
    }
    for (px, &label) in out.pixels_mut().chunks_exact_mut(3).zip(&superpixels.labels) {
        let a = weights[label] / peak;
        let alpha = 0.5 * a.abs();
        let tint = if a > 0.0 { [255.0, 0.0, 0.0] } else { [0.0, 0.0, 255.0] };
        for (v, t) in px.iter_mut().zip(tint) {
            *v = ((1.0 - alpha) * f64::from(*v) + alpha * t).round().clamp(0.0, 255.0) as u8;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 10×8 map: segment 1 is the rectangle x∈[2,6), y∈[3,7), the rest is 0.
    fn fixture() -> (Image, SuperpixelMap) {
        let img = Image::from_fn(10, 8, 3, |x, y, c| (x * 10 + y * 3 + c) as u8).unwrap();
        let labels = (0..8)
            .flat_map(|y| (0..10).map(move |x| usize::from((2..6).contains(&x) && (3..7).contains(&y))))
            .collect();
        (img, SuperpixelMap { width: 10, height: 8, labels, count: 2 })
    }

    #[test]
    fn empty_highlight_is_identity() {
        let (img, sp) = fixture();
        assert_eq!(render_lime(&img, &sp, &[false, false]).unwrap(), img);
    }

    #[test]
    fn rectangle_outline_is_exactly_its_inner_boundary() {
        let (img, sp) = fixture();
        let out = render_lime(&img, &sp, &[false, true]).unwrap();
        for y in 0..8 {
            for x in 0..10 {
                let on_boundary = (2..6).contains(&x)
                    && (3..7).contains(&y)
                    && (x == 2 || x == 5 || y == 3 || y == 6);
                if on_boundary {
                    assert_eq!(out.pixel(x, y), &OUTLINE, "({x},{y})");
                } else {
                    assert_eq!(out.pixel(x, y), img.pixel(x, y), "({x},{y})");
                }
            }
        }
    }

    #[test]
    fn image_border_counts_as_boundary() {
        let (img, sp) = fixture();
        let out = render_lime(&img, &sp, &[true, true]).unwrap();
        let yellow = out.pixels().chunks(3).filter(|p| *p == OUTLINE).count();
        assert_eq!(yellow, 2 * 10 + 2 * 6);
    }

    #[test]
    fn shap_zero_is_identity_and_signs_tint() {
        let (img, sp) = fixture();
        assert_eq!(render_shap(&img, &sp, &[0.0, 0.0]).unwrap(), img);
        let out = render_shap(&img, &sp, &[-0.5, 1.0]).unwrap();
        // full-strength positive: half red
        let p = img.pixel(3, 4);
        let q = out.pixel(3, 4);
        assert_eq!(q[0], ((f64::from(p[0]) + 255.0) / 2.0).round() as u8);
        assert_eq!(q[2], (f64::from(p[2]) / 2.0).round() as u8);
        // half-strength negative: quarter blue
        let p = img.pixel(0, 0);
        let q = out.pixel(0, 0);
        assert_eq!(q[2], (0.75 * f64::from(p[2]) + 0.25 * 255.0).round() as u8);
        assert!(render_shap(&img, &sp, &[1.0]).is_err());
    }

    #[test]
    fn gray_input_becomes_rgb() {
        let img = Image::filled(4, 4, &[90]).unwrap();
        let sp = SuperpixelMap { width: 4, height: 4, labels: vec![0; 16], count: 1 };
        let out = render_lime(&img, &sp, &[false]).unwrap();
        assert_eq!(out.channels(), 3);
        assert!(out.pixels().iter().all(|&v| v == 90));
    }
}
