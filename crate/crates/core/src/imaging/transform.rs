use super::filters::to_grayscale;
use super::Image;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Bilinear resize on a centre-aligned sampling grid.
pub fn resize(image: &Image, target_w: usize, target_h: usize) -> Result<Image> {
    if target_w == 0 || target_h == 0 {
        return Err(Error::Parameter(format!(
            "resize target {target_w}×{target_h} must be positive"
        )));
    }
    if (target_w, target_h) == (image.width(), image.height()) {
        return Ok(image.clone());
    }
    let (w, h, c) = (image.width(), image.height(), image.channels());
    let sx = w as f64 / target_w as f64;
    let sy = h as f64 / target_h as f64;
    let source = |dst: usize, scale: f64, len: usize| {
        let s = ((dst as f64 + 0.5) * scale - 0.5).clamp(0.0, (len - 1) as f64);
        let i0 = s.floor() as usize;
        (i0, (i0 + 1).min(len - 1), s - i0 as f64)
    };
    Image::from_fn(target_w, target_h, c, |x, y, ch| {
        let (x0, x1, fx) = source(x, sx, w);
        let (y0, y1, fy) = source(y, sy, h);
        let p = |xx: usize, yy: usize| f64::from(image.pixel(xx, yy)[ch]);
        let top = p(x0, y0) * (1.0 - fx) + p(x1, y0) * fx;
        let bottom = p(x0, y1) * (1.0 - fx) + p(x1, y1) * fx;
        (top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8
    })
}

/// `H×W×C` tensor with values `pixel / 255`.
pub fn normalize<T: Scalar>(image: &Image) -> Tensor<T> {
    let scale = T::of(255.0);
    let data = image
        .pixels()
        .iter()
        .map(|&v| T::of(f64::from(v)) / scale)
        .collect();
    Tensor::new(vec![image.height(), image.width(), image.channels()], data)
        .expect("image dimensions are positive")
}

/// Converts between gray and RGB by replication or BT.601 luma.
pub fn to_channels(image: &Image, channels: usize) -> Result<Image> {
    match (image.channels(), channels) {
        (a, b) if a == b => Ok(image.clone()),
        (3, 1) => Ok(to_grayscale(image)),
        (1, 3) => Image::new(
            image.width(),
            image.height(),
            3,
            image.pixels().iter().flat_map(|&v| [v, v, v]).collect(),
        ),
        (_, c) => Err(Error::Parameter(format!("unsupported channel count {c}"))),
    }
}

/// Quarter turn clockwise.
pub fn rotate90(image: &Image) -> Result<Image> {
    if !image.is_square() {
        return Err(Error::Dimension(format!(
            "rotation needs a square image, got {}×{}",
            image.width(),
            image.height()
        )));
    }
    let n = image.width();
    Image::from_fn(n, n, image.channels(), |x, y, c| image.pixel(y, n - 1 - x)[c])
}

pub fn rotate180(image: &Image) -> Image {
    let (w, h) = (image.width(), image.height());
    Image::from_fn(w, h, image.channels(), |x, y, c| {
        image.pixel(w - 1 - x, h - 1 - y)[c]
    })
    .expect("same dimensions")
}

/// Mirror left-right.
pub fn flip_horizontal(image: &Image) -> Image {
    let w = image.width();
    Image::from_fn(w, image.height(), image.channels(), |x, y, c| {
        image.pixel(w - 1 - x, y)[c]
    })
    .expect("same dimensions")
}

/// Mirror top-bottom.
pub fn flip_vertical(image: &Image) -> Image {
    let h = image.height();
    Image::from_fn(image.width(), h, image.channels(), |x, y, c| {
        image.pixel(x, h - 1 - y)[c]
    })
    .expect("same dimensions")
}

/// `[original, rot90, rot180, horizontal flip, vertical flip]`.
pub fn augment(image: &Image) -> Result<Vec<Image>> {
    Ok(vec![
        image.clone(),
        rotate90(image)?,
        rotate180(image),
        flip_horizontal(image),
        flip_vertical(image),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use proptest::prelude::*;

    #[test]
    fn resize_constant_and_identity() {
        let img = Image::filled(5, 3, &[10, 20, 30]).unwrap();
        let big = resize(&img, 17, 11).unwrap();
        assert!(big.pixels().chunks(3).all(|p| p == [10, 20, 30]));
        let mut rng = Rng::new(0);
        let noisy = Image::from_fn(6, 4, 1, |_, _, _| rng.below(256) as u8).unwrap();
        assert_eq!(resize(&noisy, 6, 4).unwrap(), noisy);
        assert!(resize(&noisy, 0, 4).is_err());
    }

    #[test]
    fn checkerboard_upscale_matches_hand_weights() {
        let board = Image::new(2, 2, 1, vec![0, 255, 255, 0]).unwrap();
        let up = resize(&board, 4, 4).unwrap();
        // source coordinates for the 4 output columns: 0, 0.25, 0.75, 1 (clamped)
        let f: [f64; 4] = [0.0, 0.25, 0.75, 1.0];
        for y in 0..4 {
            for x in 0..4 {
                let (fx, fy) = (f[x], f[y]);
                let v = 255.0 * (fx * (1.0 - fy) + (1.0 - fx) * fy);
                assert_eq!(up.pixel(x, y)[0], v.round() as u8, "({x},{y})");
            }
        }
        assert_eq!(up.pixel(1, 1)[0], 96);
    }

    #[test]
    fn normalize_endpoints() {
        let img = Image::new(3, 1, 1, vec![0, 128, 255]).unwrap();
        let t = normalize::<f64>(&img);
        assert_eq!(t.shape(), &[1, 3, 1]);
        assert_eq!(t.data()[0], 0.0);
        assert!((t.data()[1] - 0.50196).abs() < 1e-5);
        assert_eq!(t.data()[1], 128.0 / 255.0);
        assert_eq!(t.data()[2], 1.0);
    }

    #[test]
    fn rot90_index_permutation() {
        // 1 2 3        7 4 1
        // 4 5 6   →    8 5 2
        // 7 8 9        9 6 3
        let img = Image::new(3, 3, 1, (1..=9).collect()).unwrap();
        assert_eq!(rotate90(&img).unwrap().pixels(), &[7, 4, 1, 8, 5, 2, 9, 6, 3]);
        let wide = Image::filled(3, 2, &[0]).unwrap();
        assert!(matches!(augment(&wide), Err(Error::Dimension(_))));
    }

    proptest! {
        #[test]
        fn augmentation_group_relations(n in 1usize..9, rgb in any::<bool>(), seed in any::<u64>()) {
            let mut rng = Rng::new(seed);
            let c = if rgb { 3 } else { 1 };
            let img = Image::from_fn(n, n, c, |_, _, _| rng.below(256) as u8).unwrap();
            let out = augment(&img).unwrap();
            prop_assert_eq!(out.len(), 5);
            prop_assert_eq!(&out[0], &img);
            prop_assert_eq!(rotate90(&out[1]).unwrap(), out[2].clone());
            prop_assert_eq!(flip_horizontal(&out[3]), img.clone());
            prop_assert_eq!(flip_vertical(&out[4]), img.clone());
            let t = normalize::<f32>(&img);
            prop_assert!(t.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }
}
