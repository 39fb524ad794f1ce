//! Binary portable anymap I/O: P5 (gray) and P6 (RGB), maxval 255.

use std::fs;
use std::path::Path;

use super::Image;
use crate::error::{Error, Result};

pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pnm(&bytes).map_err(|e| e.at_path(path))
}

pub fn write_image(image: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pnm(image)).map_err(|e| Error::io(path, e))
}

pub fn encode_pnm(image: &Image) -> Vec<u8> {
    let magic = if image.channels() == 3 { "P6" } else { "P5" };
    let mut out = format!("{magic}\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.pixels());
    out
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::format(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(start, format!("{what} out of range")))
    }
}

pub fn decode_pnm(bytes: &[u8]) -> Result<Image> {
    let channels = match bytes.get(..2) {
        Some(b"P6") => 3,
        Some(b"P5") => 1,
        _ => return Err(Error::format(0, "expected magic P5 or P6")),
    };
    let mut h = Header { bytes, pos: 2 };
    if !h.bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(Error::format(2, "expected whitespace after magic"));
    }
    let width = h.number("width")?;
    let height = h.number("height")?;
    h.skip_space_and_comments();
    let maxval_at = h.pos;
    let maxval = h.number("maxval")?;
    if maxval != 255 {
        return Err(Error::format(
            maxval_at,
            format!("maxval {maxval} unsupported, expected 255"),
        ));
    }
    if width == 0 || height == 0 {
        return Err(Error::format(3, format!("image size {width}×{height}")));
    }
    match h.bytes.get(h.pos) {
        Some(b) if b.is_ascii_whitespace() => h.pos += 1,
        _ => return Err(Error::format(h.pos, "expected single whitespace before raster")),
    }
    let need = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::format(3, "image size overflows"))?;
    let payload = &bytes[h.pos..];
    if payload.len() < need {
        return Err(Error::format(
            bytes.len(),
            format!("truncated raster: expected {need} bytes, found {}", payload.len()),
        ));
    }
    Image::new(width, height, channels, payload[..need].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use proptest::prelude::*;

    #[test]
    fn minimal_p6() {
        let mut bytes = b"P6\n2 2\n255\n".to_vec();
        bytes.extend(0u8..12);
        let img = decode_pnm(&bytes).unwrap();
        assert_eq!((img.width(), img.height(), img.channels()), (2, 2, 3));
        assert_eq!(img.pixels(), &(0u8..12).collect::<Vec<_>>()[..]);
    }

    #[test]
    fn minimal_p5_with_comment() {
        let bytes = b"P5\n# made by hand\n3 1 # trailing\n255\n\x00\x80\xff";
        let img = decode_pnm(bytes).unwrap();
        assert_eq!(img.channels(), 1);
        assert_eq!(img.pixels(), &[0, 128, 255]);
    }

    #[test]
    fn random_rgb_round_trip_through_file() {
        let mut rng = Rng::new(2);
        let img = Image::from_fn(7, 5, 3, |_, _, _| rng.below(256) as u8).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.ppm");
        write_image(&img, &path).unwrap();
        assert_eq!(read_image(&path).unwrap(), img);
    }

    #[test]
    fn errors_carry_offsets() {
        match decode_pnm(b"P3\n1 1\n255\n000") {
            Err(Error::Format { offset: 0, .. }) => {}
            other => panic!("{other:?}"),
        }
        match decode_pnm(b"P5\n1 1\n65535\n\x00\x00") {
            Err(Error::Format { offset, message }) => {
                assert_eq!(offset, 7);
                assert!(message.contains("maxval"));
            }
            other => panic!("{other:?}"),
        }
        match decode_pnm(b"P6\n2 2\n255\n\x00\x01") {
            Err(Error::Format { offset, message }) => {
                assert_eq!(offset, 13);
                assert!(message.contains("truncated"));
            }
            other => panic!("{other:?}"),
        }
        assert!(decode_pnm(b"P6\nx 2\n255\n").is_err());
    }

    proptest! {
        #[test]
        fn encode_decode_is_identity(
            w in 1usize..12, h in 1usize..12, gray in any::<bool>(), seed in any::<u64>(),
        ) {
            let mut rng = Rng::new(seed);
            let c = if gray { 1 } else { 3 };
            let img = Image::from_fn(w, h, c, |_, _, _| rng.below(256) as u8).unwrap();
            prop_assert_eq!(decode_pnm(&encode_pnm(&img)).unwrap(), img);
        }
    }
}
