use std::path::Path;

use serde::{Deserialize, Serialize};

use super::history::{EpochRecord, TrainingHistory};
use super::manifest::Manifest;
use super::source::{Augmented, InMemorySource, ManifestSource, SampleSource};
use super::split::{SplitAssignment, SplitTag};
use crate::error::{Error, Result};
use crate::imaging::{normalize, Pipeline};
use crate::metrics::{class_report, ClassReport, ConfusionMatrix};
use crate::network::model::LOG_EPSILON;
use crate::network::{backward_sample, forward_sample, predict, NetworkSpec, Parameters};
use crate::optimizer::{OptimizerConfig, OptimizerState};
use crate::rng::Rng;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

const STREAM_INIT: u64 = 0x1000;
const STREAM_SHUFFLE: u64 = 0x1001;

/// Preloading budget for [`train`]; larger datasets are streamed from disk.
const PRELOAD_BYTES: usize = 512 << 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerConfig,
    /// L2 coefficient on weights.
    pub lambda: f64,
    pub seed: u64,
    /// Stop after this many epochs without a validation-loss improvement.
    pub patience: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            batch_size: 32,
            optimizer: OptimizerConfig::default(),
            lambda: 1e-4,
            seed: 0,
            patience: Some(10),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Parameter(format!(
                "epochs and batch size must be ≥ 1, got {} and {}",
                self.epochs, self.batch_size
            )));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Parameter(format!("lambda must be ≥ 0, got {}", self.lambda)));
        }
        if self.patience == Some(0) {
            return Err(Error::Parameter("patience must be ≥ 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpochControl {
    Continue,
    Stop,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome<T> {
    /// Parameters from the epoch with minimum validation loss.
    pub best: Parameters<T>,
    /// Parameters after the last epoch run.
    pub last: Parameters<T>,
    pub history: TrainingHistory,
}

/// The deterministic initialisation used by training for `seed`.
pub fn initial_parameters<T: Scalar>(spec: &NetworkSpec, seed: u64) -> Result<Parameters<T>> {
    Parameters::init(spec, &mut Rng::new(seed).split(STREAM_INIT))
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub confusion: ConfusionMatrix,
    pub report: ClassReport,
    pub loss: f64,
    pub accuracy: f64,
    /// Per-sample class probabilities.
    pub probabilities: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub predictions: Vec<usize>,
}

/// Lowest index wins ties.
fn argmax<T: Scalar>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn sample_tensor<T: Scalar>(source: &dyn SampleSource, i: usize) -> Result<Tensor<T>> {
    Ok(normalize::<T>(&source.image(i)?))
}

pub fn evaluate<T: Scalar>(
    spec: &NetworkSpec,
    params: &Parameters<T>,
    source: &dyn SampleSource,
    lambda: f64,
) -> Result<Evaluation> {
    if source.is_empty() {
        return Err(Error::Data("cannot evaluate an empty sample set".into()));
    }
    let mut confusion = ConfusionMatrix::new(spec.classes);
    let mut probabilities = Vec::with_capacity(source.len());
    let mut labels = Vec::with_capacity(source.len());
    let mut predictions = Vec::with_capacity(source.len());
    let mut ce = 0.0;
    for i in 0..source.len() {
        let label = source.label(i);
        let probs = predict(spec, params, &sample_tensor::<T>(source, i)?)?;
        let pred = argmax(probs.data());
        confusion.record(label, pred)?;
        ce -= probs.data()[label].to_f64_lossless().max(LOG_EPSILON).ln();
        probabilities.push(probs.data().iter().map(|v| v.to_f64_lossless()).collect());
        labels.push(label);
        predictions.push(pred);
    }
    let loss = ce / source.len() as f64 + lambda * params.weight_penalty().to_f64_lossless();
    Ok(Evaluation {
        report: class_report(&confusion),
        accuracy: crate::metrics::accuracy(&confusion),
        confusion,
        loss,
        probabilities,
        labels,
        predictions,
    })
}

/// Mini-batch training loop with best-epoch retention.
///
/// Each epoch shuffles the training indices, runs forward/backward per batch
/// (final partial batch kept) and applies one optimizer step per batch.
/// Training loss/accuracy are running averages over the epoch. `on_epoch`
/// sees every finished epoch and may stop training early.
pub fn train_sources<T: Scalar>(
    spec: &NetworkSpec,
    train: &dyn SampleSource,
    val: &dyn SampleSource,
    config: &TrainConfig,
    initial: Option<Parameters<T>>,
    on_epoch: &mut dyn FnMut(&EpochRecord, &Parameters<T>) -> EpochControl,
) -> Result<TrainOutcome<T>> {
    config.validate()?;
    spec.validate()?;
    if train.is_empty() {
        return Err(Error::Data("training split is empty".into()));
    }
    if val.is_empty() {
        return Err(Error::Data("validation split is empty".into()));
    }
    let mut params = match initial {
        Some(p) => {
            p.check(spec)?;
            p
        }
        None => initial_parameters(spec, config.seed)?,
    };
    let mut optimizer = OptimizerState::<T>::new(config.optimizer)?;
    let mut shuffle = Rng::new(config.seed).split(STREAM_SHUFFLE);
    let mut history = TrainingHistory::default();
    let mut best = params.clone();
    let mut best_loss = f64::INFINITY;
    let mut since_best = 0;
    let k = spec.classes;
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut target = vec![T::zero(); k];

    for epoch in 1..=config.epochs {
        shuffle.shuffle(&mut order);
        let (mut loss_sum, mut correct) = (0.0, 0usize);
        for batch in order.chunks(config.batch_size) {
            let mut grads = params.zeros_like();
            let scale = T::one() / T::of(batch.len() as f64);
            let mut ce = 0.0;
            for &i in batch {
                let label = train.label(i);
                if label >= k {
                    return Err(Error::Parameter(format!("label {label} outside {k} classes")));
                }
                let acts = forward_sample(spec, &params, &sample_tensor::<T>(train, i)?)?;
                let probs = acts.probabilities().data();
                ce -= probs[label].to_f64_lossless().max(LOG_EPSILON).ln();
                if argmax(probs) == label {
                    correct += 1;
                }
                target.fill(T::zero());
                target[label] = T::one();
                backward_sample(spec, &params, &acts, &target, scale, &mut grads)?;
            }
            let penalty = config.lambda * params.weight_penalty().to_f64_lossless();
            loss_sum += ce + penalty * batch.len() as f64;
            crate::network::model::add_weight_decay(&params, &mut grads, config.lambda);
            optimizer.step(&mut params, &grads)?;
        }
        let eval = evaluate(spec, &params, val, config.lambda)?;
        let record = EpochRecord {
            epoch,
            train_loss: loss_sum / train.len() as f64,
            train_acc: correct as f64 / train.len() as f64,
            val_loss: eval.loss,
            val_acc: eval.accuracy,
        };
        history.epochs.push(record);
        if record.val_loss < best_loss {
            best_loss = record.val_loss;
            best = params.clone();
            since_best = 0;
        } else {
            since_best += 1;
        }
        if on_epoch(&record, &params) == EpochControl::Stop {
            break;
        }
        if config.patience.is_some_and(|p| since_best >= p) {
            break;
        }
    }
    Ok(TrainOutcome {
        best,
        last: params,
        history,
    })
}

/// Trains from a manifest: the `train`/`val` tags of `split` select the
/// records, images are read below `root` and run through `pipeline`;
/// `augment` expands the training set fivefold.
#[allow(clippy::too_many_arguments)]
pub fn train<T: Scalar>(
    spec: &NetworkSpec,
    manifest: &Manifest,
    root: &Path,
    split: &SplitAssignment,
    pipeline: &Pipeline,
    augment: bool,
    config: &TrainConfig,
    on_epoch: &mut dyn FnMut(&EpochRecord, &Parameters<T>) -> EpochControl,
) -> Result<TrainOutcome<T>> {
    if split.tags.len() != manifest.len() {
        return Err(Error::Dimension(format!(
            "split covers {} records, manifest has {}",
            split.tags.len(),
            manifest.len()
        )));
    }
    if manifest.classes().len() != spec.classes {
        return Err(Error::Parameter(format!(
            "manifest has {} classes, network expects {}",
            manifest.classes().len(),
            spec.classes
        )));
    }
    let train_idx = split.indices(SplitTag::Train);
    let val_idx = split.indices(SplitTag::Val);
    let train_src = ManifestSource::new(manifest, root, &train_idx, pipeline.clone());
    let val_src = ManifestSource::new(manifest, root, &val_idx, pipeline.clone());
    let per_image = pipeline.width * pipeline.height * pipeline.channels;
    if per_image * (train_idx.len() + val_idx.len()) <= PRELOAD_BYTES {
        let train_mem = InMemorySource::collect(&train_src)?;
        let val_mem = InMemorySource::collect(&val_src)?;
        if augment {
            let aug = Augmented { inner: train_mem };
            train_sources(spec, &aug, &val_mem, config, None, on_epoch)
        } else {
            train_sources(spec, &train_mem, &val_mem, config, None, on_epoch)
        }
    } else if augment {
        let aug = Augmented { inner: train_src };
        train_sources(spec, &aug, &val_src, config, None, on_epoch)
    } else {
        train_sources(spec, &train_src, &val_src, config, None, on_epoch)
    }
}
