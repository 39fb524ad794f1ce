//! Manifests, stratified splits, the epoch loop and evaluation.

mod history;
mod manifest;
mod source;
mod split;
mod trainer;

pub use history::{EpochRecord, TrainingHistory};
pub use manifest::{Manifest, Record};
pub use source::{Augmented, InMemorySource, ManifestSource, SampleSource, Subset};
pub use split::{split, SplitAssignment, SplitTag, DEFAULT_RATIOS, MIN_CLASS_RECORDS};
pub use trainer::{
    evaluate, initial_parameters, train, train_sources, EpochControl, Evaluation, TrainConfig,
    TrainOutcome,
};
