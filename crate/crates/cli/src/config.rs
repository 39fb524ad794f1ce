//! Run configuration: flags > `--config` JSON > `GRAINFORGE_SEED` > defaults.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use grainforge::explain::{Baseline, LimeConfig, SlicParams};
use grainforge::imaging::{CannyParams, Pipeline};
use grainforge::network::{build_disease_cnn, build_rice_cnn};
use grainforge::optimizer::{Algorithm, OptimizerConfig};
use grainforge::training::TrainConfig;
use grainforge::NetworkSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SEED_ENV: &str = "GRAINFORGE_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// 50×50×3 grain classifier, five classes.
    Rice,
    /// 224×224×3 leaf-disease classifier, four classes.
    Disease,
}

impl ModelKind {
    pub fn spec(self) -> NetworkSpec {
        match self {
            ModelKind::Rice => build_rice_cnn(),
            ModelKind::Disease => build_disease_cnn(),
        }
    }

    fn default_epochs(self) -> usize {
        match self {
            ModelKind::Rice => 30,
            ModelKind::Disease => 80,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    /// Per-image mean colour.
    Mean,
    /// Fixed gray 128.
    Gray,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: grainforge::Error| e.to_string())
}

/// Training and preprocessing settings. Every field is optional so flags and
/// config files can be layered.
#[derive(Clone, Debug, Default, Serialize, Deserialize, Args)]
#[serde(default)]
pub struct RunOptions {
    /// Dataset root; manifest paths are relative to it.
    #[arg(long)]
    pub data_root: Option<PathBuf>,
    /// Manifest CSV (`path,label`).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// sgd, adam or adamax.
    #[arg(long, value_parser = parse_algorithm)]
    pub optimizer: Option<Algorithm>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Epochs without validation-loss improvement before stopping.
    #[arg(long)]
    pub patience: Option<usize>,
    /// Falls back to $GRAINFORGE_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// L2 coefficient on weights.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Feed Canny edge maps instead of colour images.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub canny: Option<bool>,
    /// Mask each image to its largest Otsu foreground component.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub segment: Option<bool>,
    /// Train on the five-fold rotation/flip augmentation.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub augment: Option<bool>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, Args)]
#[serde(default)]
pub struct ExplainOptions {
    /// Target superpixel count (default 40, or 100 for 224-pixel inputs).
    #[arg(long)]
    pub segments: Option<usize>,
    #[arg(long)]
    pub compactness: Option<f64>,
    /// Perturbation samples.
    #[arg(long)]
    pub samples: Option<usize>,
    /// LIME kernel width σ.
    #[arg(long)]
    pub kernel_width: Option<f64>,
    /// LIME ridge λ.
    #[arg(long)]
    pub ridge: Option<f64>,
    /// Segments outlined in the LIME heatmap.
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long, value_enum)]
    pub baseline: Option<BaselineKind>,
}

/// Layout of a `--config` file and of the `run.json` that `train` writes.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(flatten)]
    pub run: RunOptions,
    pub explain: ExplainOptions,
}

macro_rules! overlay {
    ($top:expr, $bottom:expr, [$($field:ident),*]) => {
        $( if $top.$field.is_none() { $top.$field = $bottom.$field.clone(); } )*
    };
}

impl ConfigFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }
}

/// Flags win; unset flags fall back to the config file.
pub fn layer(
    mut run: RunOptions,
    mut explain: ExplainOptions,
    config: Option<&Path>,
) -> Result<(RunOptions, ExplainOptions), CliError> {
    if let Some(path) = config {
        let file = ConfigFile::read(path)?;
        overlay!(
            run,
            file.run,
            [data_root, manifest, model, optimizer, learning_rate, batch_size, epochs, patience, seed, lambda, canny, segment, augment]
        );
        overlay!(
            explain,
            file.explain,
            [segments, compactness, samples, kernel_width, ridge, top_k, baseline]
        );
    }
    if run.seed.is_none() {
        if let Ok(value) = std::env::var(SEED_ENV) {
            let seed = value
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{SEED_ENV}={value:?} is not an unsigned integer")))?;
            run.seed = Some(seed);
        }
    }
    Ok((run, explain))
}

/// Fully resolved training run.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub model: ModelKind,
    pub train: TrainConfig,
    pub canny: bool,
    pub segment: bool,
    pub augment: bool,
}

impl Resolved {
    pub fn from_options(run: &RunOptions) -> Result<Self, CliError> {
        let model = run.model.unwrap_or(ModelKind::Rice);
        let defaults = TrainConfig::default();
        let optimizer = OptimizerConfig::new(
            run.optimizer.unwrap_or(defaults.optimizer.algorithm),
            run.learning_rate.unwrap_or(defaults.optimizer.learning_rate),
        );
        let train = TrainConfig {
            epochs: run.epochs.unwrap_or(model.default_epochs()),
            batch_size: run.batch_size.unwrap_or(defaults.batch_size),
            optimizer,
            lambda: run.lambda.unwrap_or(defaults.lambda),
            seed: run.seed.unwrap_or(0),
            patience: Some(run.patience.unwrap_or(10)),
        };
        if train.epochs == 0 {
            return Err(CliError::Usage("--epochs must be at least 1".into()));
        }
        if train.batch_size == 0 {
            return Err(CliError::Usage("--batch-size must be at least 1".into()));
        }
        if train.patience == Some(0) {
            return Err(CliError::Usage("--patience must be at least 1".into()));
        }
        if !(optimizer.learning_rate > 0.0 && optimizer.learning_rate.is_finite()) {
            return Err(CliError::Usage(format!(
                "--learning-rate must be positive, got {}",
                optimizer.learning_rate
            )));
        }
        if !(train.lambda >= 0.0 && train.lambda.is_finite()) {
            return Err(CliError::Usage(format!("--lambda must be ≥ 0, got {}", train.lambda)));
        }
        Ok(Self {
            model,
            train,
            canny: run.canny.unwrap_or(false),
            segment: run.segment.unwrap_or(false),
            augment: run.augment.unwrap_or(false),
        })
    }

    /// The options that reproduce this run, for `run.json`.
    pub fn to_options(&self, data_root: &Path, manifest: &Path) -> RunOptions {
        RunOptions {
            data_root: Some(data_root.to_path_buf()),
            manifest: Some(manifest.to_path_buf()),
            model: Some(self.model),
            optimizer: Some(self.train.optimizer.algorithm),
            learning_rate: Some(self.train.optimizer.learning_rate),
            batch_size: Some(self.train.batch_size),
            epochs: Some(self.train.epochs),
            patience: self.train.patience,
            seed: Some(self.train.seed),
            lambda: Some(self.train.lambda),
            canny: Some(self.canny),
            segment: Some(self.segment),
            augment: Some(self.augment),
        }
    }
}

/// Preprocessing for a network input shape `[H, W, C]`.
pub fn pipeline_for(input_shape: [usize; 3], canny: bool, segment: bool) -> Pipeline {
    Pipeline {
        width: input_shape[1],
        height: input_shape[0],
        channels: input_shape[2],
        segment,
        canny: canny.then(CannyParams::default),
    }
}

pub fn existing_path(path: Option<&PathBuf>, what: &str) -> Result<PathBuf, CliError> {
    let path = path.ok_or_else(|| CliError::Usage(format!("--{what} is required")))?;
    if !path.exists() {
        return Err(CliError::Usage(format!("{what} {} does not exist", path.display())));
    }
    Ok(path.clone())
}

pub struct ExplainSettings {
    pub slic: SlicParams,
    pub lime: LimeConfig,
    pub samples: usize,
    pub baseline: Baseline,
}

impl ExplainSettings {
    pub fn resolve(opts: &ExplainOptions, seed: u64, input_width: usize) -> Result<Self, CliError> {
        let segments = opts.segments.unwrap_or(if input_width >= 224 { 100 } else { 40 });
        let slic = SlicParams {
            segments,
            compactness: opts.compactness.unwrap_or(SlicParams::default().compactness),
            ..SlicParams::default()
        };
        let defaults = LimeConfig::default();
        let lime = LimeConfig {
            n_samples: opts.samples.unwrap_or(defaults.n_samples),
            kernel_width: opts.kernel_width.unwrap_or(defaults.kernel_width),
            ridge: opts.ridge.unwrap_or(defaults.ridge),
            top_k: opts.top_k.unwrap_or(defaults.top_k),
            seed,
        };
        if segments == 0 {
            return Err(CliError::Usage("--segments must be at least 1".into()));
        }
        if !(slic.compactness >= 0.0) {
            return Err(CliError::Usage("--compactness must be ≥ 0".into()));
        }
        if lime.n_samples == 0 || !(lime.kernel_width > 0.0) || !(lime.ridge >= 0.0) {
            return Err(CliError::Usage(
                "need --samples ≥ 1, --kernel-width > 0 and --ridge ≥ 0".into(),
            ));
        }
        let baseline = match opts.baseline.unwrap_or(BaselineKind::Mean) {
            BaselineKind::Mean => Baseline::MeanColor,
            BaselineKind::Gray => Baseline::Gray(128),
        };
        Ok(Self {
            slic,
            samples: lime.n_samples,
            lime,
            baseline,
        })
    }
}
