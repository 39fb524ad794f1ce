use super::Image;
use crate::error::{Error, Result};

/// Single-channel floating-point raster used between filter stages.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayPlane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl GrayPlane {
    /// Requires a single-channel image.
    pub fn from_image(image: &Image) -> Result<Self> {
        if image.channels() != 1 {
            return Err(Error::Dimension(format!(
                "expected a grayscale image, got {} channels",
                image.channels()
            )));
        }
        Ok(Self {
            width: image.width(),
            height: image.height(),
            data: image.pixels().iter().map(|&v| f64::from(v)).collect(),
        })
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Sample with clamp-to-border replication.
    #[inline]
    pub fn clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.at(x, y)
    }

    pub fn to_image(&self) -> Image {
        let pixels = self
            .data
            .iter()
            .map(|&v| v.round().clamp(0.0, 255.0) as u8)
            .collect();
        Image::new(self.width, self.height, 1, pixels).expect("plane dimensions")
    }
}

/// BT.601 luma. Grayscale input is returned unchanged.
pub fn to_grayscale(image: &Image) -> Image {
    if image.channels() == 1 {
        return image.clone();
    }
    let pixels = image
        .pixels()
        .chunks_exact(3)
        .map(|p| {
            let luma = 0.299 * f64::from(p[0]) + 0.587 * f64::from(p[1]) + 0.114 * f64::from(p[2]);
            luma.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    Image::new(image.width(), image.height(), 1, pixels).expect("same dimensions")
}

/// Normalised 1-D Gaussian taps for offsets `-r..=r`, `r = ⌈3σ⌉`.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Parameter(format!("sigma must be positive, got {sigma}")));
    }
    let r = (3.0 * sigma).ceil() as isize;
    let taps: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = taps.iter().sum();
    Ok(taps.into_iter().map(|t| t / total).collect())
}

/// Separable Gaussian blur with clamp-to-border edges.
pub fn gaussian_blur_plane(plane: &GrayPlane, sigma: f64) -> Result<GrayPlane> {
    let k = gaussian_kernel(sigma)?;
    let r = (k.len() / 2) as isize;
    let (w, h) = (plane.width, plane.height);
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] = k
                .iter()
                .enumerate()
                .map(|(i, &t)| t * plane.clamped(x as isize + i as isize - r, y as isize))
                .sum();
        }
    }
    let tmp = GrayPlane {
        width: w,
        height: h,
        data: tmp,
    };
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = k
                .iter()
                .enumerate()
                .map(|(i, &t)| t * tmp.clamped(x as isize, y as isize + i as isize - r))
                .sum();
        }
    }
    Ok(GrayPlane {
        width: w,
        height: h,
        data: out,
    })
}

/// Gaussian blur of an 8-bit image; RGB input is converted to grayscale first.
pub fn gaussian_blur(image: &Image, sigma: f64) -> Result<Image> {
    let plane = GrayPlane::from_image(&to_grayscale(image))?;
    Ok(gaussian_blur_plane(&plane, sigma)?.to_image())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn grayscale_examples() {
        let white = Image::filled(1, 1, &[255, 255, 255]).unwrap();
        assert_eq!(to_grayscale(&white).pixels(), &[255]);
        let red = Image::filled(1, 1, &[255, 0, 0]).unwrap();
        assert_eq!(to_grayscale(&red).pixels(), &[76]);
        let gray = Image::new(2, 1, 1, vec![3, 200]).unwrap();
        assert_eq!(to_grayscale(&gray), gray);
    }

    #[test]
    fn blur_keeps_constants() {
        let img = Image::filled(9, 7, &[77]).unwrap();
        assert_eq!(gaussian_blur(&img, 1.3).unwrap(), img);
        assert!(gaussian_blur(&img, 0.0).is_err());
    }

    #[test]
    fn impulse_response_is_the_sampled_kernel() {
        let sigma = 1.2;
        let (w, h) = (31, 31);
        let mut plane = GrayPlane {
            width: w,
            height: h,
            data: vec![0.0; w * h],
        };
        plane.data[15 * w + 15] = 1.0;
        let out = gaussian_blur_plane(&plane, sigma).unwrap();
        // independent evaluation of the 2-D Gaussian at integer offsets
        let r = (3.0 * sigma).ceil() as i32;
        let g = |i: i32| (-(f64::from(i * i)) / (2.0 * sigma * sigma)).exp();
        let norm: f64 = (-r..=r).map(g).sum();
        for dy in -r - 1..=r + 1 {
            for dx in -r - 1..=r + 1 {
                let expect = if dx.abs() <= r && dy.abs() <= r {
                    g(dx) * g(dy) / (norm * norm)
                } else {
                    0.0
                };
                let got = out.at((15 + dx) as usize, (15 + dy) as usize);
                assert!((got - expect).abs() < 1e-12, "({dx},{dy}) {got} {expect}");
            }
        }
    }

    #[test]
    fn separable_equals_full_2d_convolution() {
        let mut rng = Rng::new(8);
        let (w, h) = (13, 10);
        let plane = GrayPlane {
            width: w,
            height: h,
            data: (0..w * h).map(|_| rng.uniform() * 255.0).collect(),
        };
        let sigma = 0.9;
        let k = gaussian_kernel(sigma).unwrap();
        let r = (k.len() / 2) as isize;
        let out = gaussian_blur_plane(&plane, sigma).unwrap();
        for y in 0..h {
            for x in 0..w {
                let mut s = 0.0;
                for j in -r..=r {
                    for i in -r..=r {
                        let kv = k[(i + r) as usize] * k[(j + r) as usize];
                        s += kv * plane.clamped(x as isize + i, y as isize + j);
                    }
                }
                assert!((out.at(x, y) - s).abs() < 1e-9);
            }
        }
    }
}
