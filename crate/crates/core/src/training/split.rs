use serde::{Deserialize, Serialize};

use super::manifest::Manifest;
use crate::error::{Error, Result};
use crate::rng::Rng;

pub const DEFAULT_RATIOS: [f64; 3] = [0.8, 0.1, 0.1];
pub const MIN_CLASS_RECORDS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Val,
    Test,
}

impl SplitTag {
    pub const ALL: [SplitTag; 3] = [SplitTag::Train, SplitTag::Val, SplitTag::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitTag::Train => "train",
            SplitTag::Val => "val",
            SplitTag::Test => "test",
        }
    }
}

impl std::str::FromStr for SplitTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(SplitTag::Train),
            "val" => Ok(SplitTag::Val),
            "test" => Ok(SplitTag::Test),
            other => Err(Error::Parameter(format!("unknown split `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitAssignment {
    pub tags: Vec<SplitTag>,
    pub seed: u64,
}

impl SplitAssignment {
    /// Record indices carrying `tag`, in manifest order.
    pub fn indices(&self, tag: SplitTag) -> Vec<usize> {
        self.tags
            .iter()
            .enumerate()
            .filter(|(_, &t)| t == tag)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn count(&self, tag: SplitTag) -> usize {
        self.tags.iter().filter(|&&t| t == tag).count()
    }
}

/// Largest-remainder apportionment of `n` items over `ratios`; leftover
/// units go to the largest fractional parts, ties to the earlier slot.
fn apportion(n: usize, ratios: &[f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut counts = [0usize; 3];
    for (c, e) in counts.iter_mut().zip(&exact) {
        // tolerate representation error such as 0.1·60 = 6.000000000000001
        *c = (e + 1e-9).floor() as usize;
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        let fa = exact[a] - counts[a] as f64;
        let fb = exact[b] - counts[b] as f64;
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut left = n.saturating_sub(counts.iter().sum());
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}

/// Stratified split: each class is shuffled with its own seeded stream and cut
/// into contiguous train/val/test blocks.
pub fn split(manifest: &Manifest, seed: u64, ratios: [f64; 3]) -> Result<SplitAssignment> {
    if ratios.iter().any(|r| !(0.0..=1.0).contains(r))
        || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return Err(Error::Parameter(format!(
            "split ratios must be non-negative and sum to 1, got {ratios:?}"
        )));
    }
    let labels = manifest.labels();
    let root = Rng::new(seed);
    let mut tags = vec![SplitTag::Train; manifest.len()];
    for (k, class) in manifest.classes().iter().enumerate() {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == k).collect();
        if members.len() < MIN_CLASS_RECORDS {
            return Err(Error::ClassTooSmall {
                class: class.clone(),
                count: members.len(),
                min: MIN_CLASS_RECORDS,
            });
        }
        root.split(k as u64).shuffle(&mut members);
        let [n_train, n_val, _] = apportion(members.len(), &ratios);
        for (pos, &i) in members.iter().enumerate() {
            tags[i] = if pos < n_train {
                SplitTag::Train
            } else if pos < n_train + n_val {
                SplitTag::Val
            } else {
                SplitTag::Test
            };
        }
    }
    Ok(SplitAssignment { tags, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::training::manifest::Record;
    use proptest::prelude::*;

    fn manifest(per_class: &[usize]) -> Manifest {
        let mut records = Vec::new();
        for (k, &n) in per_class.iter().enumerate() {
            for i in 0..n {
                records.push(Record {
                    path: format!("c{k}/{i}.ppm"),
                    label: format!("c{k}"),
                });
            }
        }
        Manifest::new(records).unwrap()
    }

    #[test]
    fn reported_dataset_sizes() {
        let rice = split(&manifest(&[15_000; 5]), 1, DEFAULT_RATIOS).unwrap();
        assert_eq!(
            SplitTag::ALL.map(|t| rice.count(t)),
            [60_000, 7_500, 7_500]
        );
        let leaf = split(&manifest(&[1_500; 4]), 1, DEFAULT_RATIOS).unwrap();
        assert_eq!(SplitTag::ALL.map(|t| leaf.count(t)), [4_800, 600, 600]);
    }

    #[test]
    fn seeds_reproduce_and_differ() {
        let m = manifest(&[50, 50]);
        let a = split(&m, 7, DEFAULT_RATIOS).unwrap();
        assert_eq!(a, split(&m, 7, DEFAULT_RATIOS).unwrap());
        let b = split(&m, 8, DEFAULT_RATIOS).unwrap();
        assert!(a.tags.iter().zip(&b.tags).any(|(x, y)| x != y));
    }

    #[test]
    fn small_class_is_named() {
        let m = manifest(&[20, 9]);
        match split(&m, 0, DEFAULT_RATIOS) {
            Err(Error::ClassTooSmall { class, count, .. }) => {
                assert_eq!((class.as_str(), count), ("c1", 9));
            }
            other => panic!("{other:?}"),
        }
        assert!(split(&manifest(&[20]), 0, [0.5, 0.4, 0.2]).is_err());
    }

    proptest! {
        #[test]
        fn split_is_a_stratified_partition(
            sizes in proptest::collection::vec(10usize..60, 1..5), seed in any::<u64>(),
        ) {
            let m = manifest(&sizes);
            let s = split(&m, seed, DEFAULT_RATIOS).unwrap();
            prop_assert_eq!(s.tags.len(), m.len());
            let labels = m.labels();
            for (k, &n) in sizes.iter().enumerate() {
                let counts = SplitTag::ALL.map(|t| {
                    (0..m.len()).filter(|&i| labels[i] == k && s.tags[i] == t).count()
                });
                prop_assert_eq!(counts.iter().sum::<usize>(), n);
                for (c, r) in counts.iter().zip(DEFAULT_RATIOS) {
                    prop_assert!((*c as f64 - r * n as f64).abs() < 1.0 + 1e-9);
                }
            }
        }
    }
}
