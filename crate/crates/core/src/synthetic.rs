//! Procedural five-class shape images, a stand-in dataset for end-to-end
//! training checks when no real crop images are at hand.

use std::path::Path;

use crate::error::Result;
use crate::imaging::{write_image, Image};
use crate::rng::Rng;
use crate::training::{InMemorySource, Manifest, Record};

/// Class names in label order (alphabetical, like a manifest's classes).
pub const SHAPE_CLASSES: [&str; 5] = ["bar", "circle", "cross", "square", "triangle"];

pub const SHAPE_SIZE: usize = 50;

/// Whether `(x, y)` (pixel centre, relative to the shape centre) lies inside
/// a shape of class `class` and half-extent `r`.
fn inside(class: usize, dx: f64, dy: f64, r: f64, vertical: bool) -> bool {
    match class {
        // bar: long thin rectangle, horizontal or vertical
        0 => {
            let (along, across) = if vertical { (dy, dx) } else { (dx, dy) };
            along.abs() <= r && across.abs() <= r * 0.28
        }
        1 => dx * dx + dy * dy <= r * r,
        2 => {
            let arm = r * 0.3;
            (dx.abs() <= r && dy.abs() <= arm) || (dy.abs() <= r && dx.abs() <= arm)
        }
        3 => dx.abs() <= r * 0.8 && dy.abs() <= r * 0.8,
        // upward triangle with apex at −r and base at +r
        _ => dy >= -r && dy <= r && dx.abs() <= (dy + r) * 0.5,
    }
}

/// One random 50×50 RGB image of `class`.
pub fn shape_image(class: usize, rng: &mut Rng) -> Image {
    assert!(class < SHAPE_CLASSES.len(), "shape class {class}");
    let r = rng.uniform_range(9.0, 15.0);
    let margin = r + 2.0;
    let cx = rng.uniform_range(margin, SHAPE_SIZE as f64 - margin);
    let cy = rng.uniform_range(margin, SHAPE_SIZE as f64 - margin);
    let vertical = rng.bernoulli(0.5);
    let background: Vec<f64> = (0..3).map(|_| rng.uniform_range(10.0, 90.0)).collect();
    let foreground: Vec<f64> = (0..3).map(|_| rng.uniform_range(150.0, 250.0)).collect();
    let mut pixels = Vec::with_capacity(SHAPE_SIZE * SHAPE_SIZE * 3);
    for y in 0..SHAPE_SIZE {
        for x in 0..SHAPE_SIZE {
            let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
            let base = if inside(class, dx, dy, r, vertical) { &foreground } else { &background };
            for &b in base {
                let v = b + 8.0 * rng.normal();
                pixels.push(v.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    Image::new(SHAPE_SIZE, SHAPE_SIZE, 3, pixels).expect("consistent size")
}

/// `per_class` images of every class, interleaved by class, from `seed`.
pub fn shape_dataset(per_class: usize, seed: u64) -> Result<InMemorySource> {
    let mut rng = Rng::new(seed);
    let mut images = Vec::with_capacity(per_class * SHAPE_CLASSES.len());
    let mut labels = Vec::with_capacity(images.capacity());
    for _ in 0..per_class {
        for class in 0..SHAPE_CLASSES.len() {
            images.push(shape_image(class, &mut rng));
            labels.push(class);
        }
    }
    InMemorySource::new(images, labels)
}

/// Writes a shape dataset as `root/<class>/<class>_<i>.ppm` and returns a
/// manifest with paths relative to `root`.
pub fn write_shape_dataset(root: &Path, per_class: usize, seed: u64) -> Result<Manifest> {
    let mut rng = Rng::new(seed);
    let mut records = Vec::new();
    for i in 0..per_class {
        for (class, name) in SHAPE_CLASSES.iter().enumerate() {
            let rel = format!("{name}/{name}_{i:04}.ppm");
            let path = root.join(&rel);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).map_err(|e| crate::Error::io(parent, e))?;
            }
            write_image(&shape_image(class, &mut rng), &path)?;
            records.push(Record {
                path: rel,
                label: (*name).to_string(),
            });
        }
    }
    Manifest::new(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::training::SampleSource;

    #[test]
    fn seeded_and_labelled() {
        let a = shape_dataset(3, 11).unwrap();
        let b = shape_dataset(3, 11).unwrap();
        assert_eq!(a.len(), 15);
        for i in 0..a.len() {
            assert_eq!(a.image(i).unwrap(), b.image(i).unwrap());
            assert_eq!(a.label(i), i % 5);
        }
        assert_ne!(a.image(0).unwrap(), shape_dataset(3, 12).unwrap().image(0).unwrap());
    }

    #[test]
    fn shapes_have_distinct_areas() {
        // foreground pixel counts at a fixed radius separate the classes
        let area = |class| {
            let mut n = 0;
            for y in -20..20 {
                for x in -20..20 {
                    n += usize::from(inside(class, x as f64 + 0.5, y as f64 + 0.5, 12.0, false));
                }
            }
            n
        };
        let areas: Vec<usize> = (0..5).map(area).collect();
        for i in 0..5 {
            assert!(areas[i] > 50);
            for j in 0..i {
                assert_ne!(areas[i], areas[j]);
            }
        }
    }

    #[test]
    fn written_dataset_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_shape_dataset(dir.path(), 2, 5).unwrap();
        assert_eq!(manifest.len(), 10);
        assert_eq!(manifest.classes(), SHAPE_CLASSES.map(String::from).as_slice());
        let first = crate::imaging::read_image(dir.path().join(&manifest.records()[0].path)).unwrap();
        assert_eq!(first, shape_image(0, &mut Rng::new(5)));
    }
}
