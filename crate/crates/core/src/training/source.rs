use std::path::PathBuf;

use super::manifest::Manifest;
use crate::error::{Error, Result};
use crate::imaging::{augment, read_image, Image, Pipeline};

/// Indexed labelled images, already preprocessed to the network input size.
pub trait SampleSource {
    fn len(&self) -> usize;

    fn label(&self, index: usize) -> usize;

    fn image(&self, index: usize) -> Result<Image>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn labels(&self) -> Vec<usize> {
        (0..self.len()).map(|i| self.label(i)).collect()
    }
}

#[derive(Clone, Debug, Default)]
pub struct InMemorySource {
    pub images: Vec<Image>,
    pub labels: Vec<usize>,
}

impl InMemorySource {
    pub fn new(images: Vec<Image>, labels: Vec<usize>) -> Result<Self> {
        if images.len() != labels.len() {
            return Err(Error::Dimension(format!(
                "{} images but {} labels",
                images.len(),
                labels.len()
            )));
        }
        Ok(Self { images, labels })
    }

    /// Materialises another source.
    pub fn collect(source: &dyn SampleSource) -> Result<Self> {
        let images = (0..source.len())
            .map(|i| source.image(i))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            images,
            labels: source.labels(),
        })
    }
}

impl SampleSource for InMemorySource {
    fn len(&self) -> usize {
        self.images.len()
    }

    fn label(&self, index: usize) -> usize {
        self.labels[index]
    }

    fn image(&self, index: usize) -> Result<Image> {
        Ok(self.images[index].clone())
    }
}

/// Reads manifest records from disk on demand and runs the pipeline.
#[derive(Clone, Debug)]
pub struct ManifestSource {
    root: PathBuf,
    items: Vec<(String, usize)>,
    pipeline: Pipeline,
}

impl ManifestSource {
    /// Records at `indices` (manifest order preserved).
    pub fn new(
        manifest: &Manifest,
        root: impl Into<PathBuf>,
        indices: &[usize],
        pipeline: Pipeline,
    ) -> Self {
        let labels = manifest.labels();
        let items = indices
            .iter()
            .map(|&i| (manifest.records()[i].path.clone(), labels[i]))
            .collect();
        Self {
            root: root.into(),
            items,
            pipeline,
        }
    }

    pub fn path(&self, index: usize) -> PathBuf {
        self.root.join(&self.items[index].0)
    }
}

impl SampleSource for ManifestSource {
    fn len(&self) -> usize {
        self.items.len()
    }

    fn label(&self, index: usize) -> usize {
        self.items[index].1
    }

    fn image(&self, index: usize) -> Result<Image> {
        let path = self.path(index);
        let raw = read_image(&path)?;
        self.pipeline.apply(&raw).map_err(|e| e.at_path(path))
    }
}

/// Restricts a source to some of its indices.
pub struct Subset<'a> {
    pub source: &'a dyn SampleSource,
    pub indices: Vec<usize>,
}

impl SampleSource for Subset<'_> {
    fn len(&self) -> usize {
        self.indices.len()
    }

    fn label(&self, index: usize) -> usize {
        self.source.label(self.indices[index])
    }

    fn image(&self, index: usize) -> Result<Image> {
        self.source.image(self.indices[index])
    }
}

/// Expands every sample into its five augmentation variants; sample `i`
/// maps to variant `i % 5` of inner sample `i / 5`.
pub struct Augmented<S> {
    pub inner: S,
}

pub const AUGMENT_FACTOR: usize = 5;

impl<S: SampleSource> SampleSource for Augmented<S> {
    fn len(&self) -> usize {
        self.inner.len() * AUGMENT_FACTOR
    }

    fn label(&self, index: usize) -> usize {
        self.inner.label(index / AUGMENT_FACTOR)
    }

    fn image(&self, index: usize) -> Result<Image> {
        let base = self.inner.image(index / AUGMENT_FACTOR)?;
        let mut variants = augment(&base)?;
        Ok(variants.swap_remove(index % AUGMENT_FACTOR))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{rotate90, write_image};
    use crate::training::manifest::Record;

    #[test]
    fn augmented_indexing() {
        let img = Image::from_fn(3, 3, 1, |x, y, _| (x + 3 * y) as u8).unwrap();
        let src = Augmented {
            inner: InMemorySource::new(vec![img.clone()], vec![4]).unwrap(),
        };
        assert_eq!(src.len(), 5);
        assert_eq!(src.label(3), 4);
        assert_eq!(src.image(0).unwrap(), img);
        assert_eq!(src.image(1).unwrap(), rotate90(&img).unwrap());
    }

    #[test]
    fn manifest_source_reads_and_reports_paths() {
        let dir = tempfile::tempdir().unwrap();
        let img = Image::filled(10, 8, &[200, 10, 10]).unwrap();
        write_image(&img, dir.path().join("ok.ppm")).unwrap();
        std::fs::write(dir.path().join("bad.ppm"), b"P6\n10 8\n255\n\x00").unwrap();
        let manifest = Manifest::new(vec![
            Record { path: "ok.ppm".into(), label: "a".into() },
            Record { path: "bad.ppm".into(), label: "b".into() },
            Record { path: "missing.ppm".into(), label: "b".into() },
        ])
        .unwrap();
        let src = ManifestSource::new(&manifest, dir.path(), &[0, 1, 2], Pipeline::new(5, 5, 3));
        let loaded = src.image(0).unwrap();
        assert_eq!((loaded.width(), loaded.height()), (5, 5));
        assert_eq!(src.label(2), 1);
        let err = src.image(1).unwrap_err().to_string();
        assert!(err.contains("bad.ppm"), "{err}");
        let err = src.image(2).unwrap_err().to_string();
        assert!(err.contains("missing.ppm"), "{err}");
    }
}
