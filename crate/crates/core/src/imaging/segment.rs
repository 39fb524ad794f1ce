use std::collections::VecDeque;

use super::filters::to_grayscale;
use super::Image;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentMask {
    pub width: usize,
    pub height: usize,
    pub mask: Vec<bool>,
}

impl SegmentMask {
    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x]
    }
}

/// Otsu threshold over the 256-bin histogram of a grayscale view.
///
/// Pixels `<= t` form the dark class. The returned `t` maximises the
/// between-class variance; ties go to the smallest `t`. An image with a
/// single intensity returns that intensity.
pub fn otsu_threshold(image: &Image) -> u8 {
    let gray = to_grayscale(image);
    let mut hist = [0u64; 256];
    for &v in gray.pixels() {
        hist[v as usize] += 1;
    }
    let distinct: Vec<usize> = (0..256).filter(|&v| hist[v] > 0).collect();
    if distinct.len() == 1 {
        return distinct[0] as u8;
    }
    let total_n: u128 = gray.pixels().len() as u128;
    let total_s: u128 = (0..256).map(|v| v as u128 * u128::from(hist[v])).sum();

    // Between-class variance is (S0·N − S·n0)² / (N²·n0·n1); the common N² is
    // dropped and candidates are compared as exact fractions.
    let mut best_t = 0usize;
    let mut best: Option<(u128, u128)> = None;
    let (mut n0, mut s0) = (0u128, 0u128);
    for t in 0..256 {
        n0 += u128::from(hist[t]);
        s0 += t as u128 * u128::from(hist[t]);
        let n1 = total_n - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let diff = (s0 * total_n).abs_diff(total_s * n0);
        let num = diff * diff;
        let den = n0 * n1;
        let better = match best {
            None => true,
            Some((bn, bd)) => match (num.checked_mul(bd), bn.checked_mul(den)) {
                (Some(a), Some(b)) => a > b,
                _ => (num as f64 / den as f64) > (bn as f64 / bd as f64),
            },
        };
        if better {
            best = Some((num, den));
            best_t = t;
        }
    }
    best_t as u8
}

/// Keeps the largest 8-connected `true` component; ties go to the component
/// met first in raster order.
pub fn largest_component(width: usize, height: usize, mask: &[bool]) -> Vec<bool> {
    let mut label = vec![usize::MAX; mask.len()];
    let mut best = (0usize, usize::MAX);
    let mut next = 0;
    let mut queue = VecDeque::new();
    for start in 0..mask.len() {
        if !mask[start] || label[start] != usize::MAX {
            continue;
        }
        label[start] = next;
        queue.push_back(start);
        let mut size = 0;
        while let Some(i) = queue.pop_front() {
            size += 1;
            let (x, y) = ((i % width) as isize, (i / width) as isize);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= width as isize || ny >= height as isize {
                        continue;
                    }
                    let j = ny as usize * width + nx as usize;
                    if mask[j] && label[j] == usize::MAX {
                        label[j] = next;
                        queue.push_back(j);
                    }
                }
            }
        }
        if size > best.0 {
            best = (size, next);
        }
        next += 1;
    }
    label.iter().map(|&l| l == best.1).collect()
}

/// Otsu foreground (brighter class) reduced to its largest 8-connected
/// component. A uniform image is all foreground when nonzero.
pub fn segment_grain(image: &Image) -> Result<SegmentMask> {
    let gray = to_grayscale(image);
    let t = otsu_threshold(&gray);
    let px = gray.pixels();
    let uniform = px.iter().all(|&v| v == px[0]);
    let fg: Vec<bool> = if uniform {
        vec![px[0] > 0; px.len()]
    } else {
        px.iter().map(|&v| v > t).collect()
    };
    if !fg.iter().any(|&f| f) {
        return Err(Error::NoForeground);
    }
    Ok(SegmentMask {
        width: gray.width(),
        height: gray.height(),
        mask: largest_component(gray.width(), gray.height(), &fg),
    })
}

/// Zeroes every pixel outside the mask.
pub fn apply_mask(image: &Image, mask: &SegmentMask) -> Result<Image> {
    if image.width() != mask.width || image.height() != mask.height {
        return Err(Error::Dimension(format!(
            "mask {}×{} does not match image {}×{}",
            mask.width,
            mask.height,
            image.width(),
            image.height()
        )));
    }
    let c = image.channels();
    let mut out = image.clone();
    for (i, px) in out.pixels_mut().chunks_exact_mut(c).enumerate() {
        if !mask.mask[i] {
            px.fill(0);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    /// Exhaustive search computed from the textbook weights/means form.
    fn otsu_oracle(image: &Image) -> u8 {
        let px = image.pixels();
        if px.iter().all(|&v| v == px[0]) {
            return px[0];
        }
        let n = px.len() as f64;
        let mut best = (-1.0, 0);
        for t in 0..=255u8 {
            let (lo, hi): (Vec<f64>, Vec<f64>) = {
                let lo = px.iter().filter(|&&v| v <= t).map(|&v| f64::from(v)).collect();
                let hi = px.iter().filter(|&&v| v > t).map(|&v| f64::from(v)).collect();
                (lo, hi)
            };
            if lo.is_empty() || hi.is_empty() {
                continue;
            }
            let w0 = lo.len() as f64 / n;
            let w1 = hi.len() as f64 / n;
            let m0 = lo.iter().sum::<f64>() / lo.len() as f64;
            let m1 = hi.iter().sum::<f64>() / hi.len() as f64;
            let var = w0 * w1 * (m0 - m1) * (m0 - m1);
            if var > best.0 + 1e-9 * var.abs() {
                best = (var, t);
            }
        }
        best.1
    }

    #[test]
    fn bimodal_threshold_separates_modes() {
        let img = Image::from_fn(10, 10, 1, |x, _, _| if x < 5 { 50 } else { 200 }).unwrap();
        let t = otsu_threshold(&img);
        assert!((50..200).contains(&t));
        assert_eq!(t, otsu_oracle(&img));
    }

    #[test]
    fn degenerate_images() {
        assert_eq!(otsu_threshold(&Image::filled(4, 4, &[0]).unwrap()), 0);
        assert_eq!(otsu_threshold(&Image::filled(4, 4, &[93]).unwrap()), 93);
    }

    #[test]
    fn otsu_matches_exhaustive_search() {
        let mut rng = Rng::new(21);
        for _ in 0..30 {
            let img = Image::from_fn(9, 7, 1, |_, _, _| rng.below(256) as u8).unwrap();
            assert_eq!(otsu_threshold(&img), otsu_oracle(&img));
        }
    }

    #[test]
    fn disc_is_recovered() {
        let (cx, cy, r) = (20.0, 18.0, 9.0);
        let inside = |x: usize, y: usize| {
            let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
            (dx * dx + dy * dy).sqrt()
        };
        let img = Image::from_fn(40, 36, 3, |x, y, _| if inside(x, y) <= r { 230 } else { 15 })
            .unwrap();
        let mask = segment_grain(&img).unwrap();
        for y in 0..36 {
            for x in 0..40 {
                let d = inside(x, y);
                if d < r - 1.0 {
                    assert!(mask.contains(x, y));
                } else if d > r + 1.0 {
                    assert!(!mask.contains(x, y));
                }
            }
        }
    }

    #[test]
    fn only_the_largest_blob_survives() {
        // 10×10 blob (100 px) and 5×6 blob (30 px)
        let img = Image::from_fn(30, 20, 1, |x, y, _| {
            let a = (2..12).contains(&x) && (3..13).contains(&y);
            let b = (20..25).contains(&x) && (5..11).contains(&y);
            if a || b {
                255
            } else {
                0
            }
        })
        .unwrap();
        let mask = segment_grain(&img).unwrap();
        assert_eq!(mask.count(), 100);
        assert!(mask.contains(2, 3) && !mask.contains(20, 5));
        let applied = apply_mask(&img, &mask).unwrap();
        assert_eq!(applied.pixels().iter().filter(|&&v| v == 255).count(), 100);
    }

    #[test]
    fn white_frame_and_black_frame() {
        let white = Image::filled(6, 5, &[255, 255, 255]).unwrap();
        assert_eq!(segment_grain(&white).unwrap().count(), 30);
        let black = Image::filled(6, 5, &[0]).unwrap();
        assert!(matches!(segment_grain(&black), Err(Error::NoForeground)));
    }
}
