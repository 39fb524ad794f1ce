use serde::{Deserialize, Serialize};

use super::linalg::weighted_least_squares;
use super::{class_value, Attribution, Baseline, MaskSample, Method, SuperpixelMap};
use crate::error::{Error, Result};
use crate::imaging::Image;
use crate::rng::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimeConfig {
    pub n_samples: usize,
    /// σ of the exponential proximity kernel.
    pub kernel_width: f64,
    /// Ridge penalty on the segment coefficients (the intercept is free).
    pub ridge: f64,
    pub top_k: usize,
    pub seed: u64,
}

impl Default for LimeConfig {
    fn default() -> Self {
        Self {
            n_samples: 1000,
            kernel_width: 0.25,
            ridge: 1.0,
            top_k: 5,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimeExplanation {
    pub attribution: Attribution,
    pub intercept: f64,
    /// Segments among the `top_k` largest strictly positive coefficients.
    pub highlight: Vec<bool>,
}

/// Cosine distance between a mask and the all-ones vector: 1 − √(|z|/M).
fn cosine_distance(mask: &[bool]) -> f64 {
    let kept = mask.iter().filter(|&&b| b).count();
    if kept == 0 {
        1.0
    } else {
        1.0 - (kept as f64 / mask.len() as f64).sqrt()
    }
}

/// Fits the weighted ridge surrogate `y ≈ β₀ + Σ βᵢ zᵢ`. Returns `(β₀, β)`.
pub fn lime_fit(
    masks: &[MaskSample],
    targets: &[f64],
    kernel_width: f64,
    ridge: f64,
) -> Result<(f64, Vec<f64>)> {
    if masks.len() != targets.len() || masks.is_empty() {
        return Err(Error::Dimension(format!(
            "{} masks for {} targets",
            masks.len(),
            targets.len()
        )));
    }
    if !(kernel_width > 0.0) || !(ridge >= 0.0) {
        return Err(Error::Parameter(format!(
            "need σ > 0 and λ ≥ 0, got σ={kernel_width} λ={ridge}"
        )));
    }
    let m = masks[0].len();
    if masks.iter().any(|z| z.len() != m) {
        return Err(Error::Dimension("masks differ in length".into()));
    }
    let rows: Vec<Vec<f64>> = masks
        .iter()
        .map(|z| {
            std::iter::once(1.0)
                .chain(z.iter().map(|&b| if b { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    let sigma2 = kernel_width * kernel_width;
    let weights: Vec<f64> = masks
        .iter()
        .map(|z| (-cosine_distance(z).powi(2) / sigma2).exp())
        .collect();
    let mut penalty = vec![ridge; m + 1];
    penalty[0] = 0.0;
    let beta = weighted_least_squares(&rows, targets, &weights, &penalty)?;
    Ok((beta[0], beta[1..].to_vec()))
}

/// Perturbation masks: every mask when `n_samples ≥ 2^M`, otherwise the
/// all-ones mask followed by independent fair coin flips.
fn sample_masks(m: usize, n_samples: usize, rng: &mut Rng) -> Vec<MaskSample> {
    if m < usize::BITS as usize - 1 && n_samples >= 1usize << m {
        return (0..1usize << m)
            .map(|bits| (0..m).map(|i| bits >> i & 1 == 1).collect())
            .collect();
    }
    let mut masks = vec![vec![true; m]];
    while masks.len() < n_samples {
        masks.push((0..m).map(|_| rng.bernoulli(0.5)).collect());
    }
    masks
}

pub fn lime_explain(
    model: &dyn Fn(&Image) -> Result<Vec<f64>>,
    image: &Image,
    superpixels: &SuperpixelMap,
    class: usize,
    baseline: &Baseline,
    config: &LimeConfig,
) -> Result<LimeExplanation> {
    let m = superpixels.count;
    if config.n_samples < m + 2 {
        return Err(Error::Parameter(format!(
            "LIME needs at least M + 2 = {} samples, got {}",
            m + 2,
            config.n_samples
        )));
    }
    let mut rng = Rng::new(config.seed);
    let masks = sample_masks(m, config.n_samples, &mut rng);
    let color = baseline.color(image);
    let targets = masks
        .iter()
        .map(|z| class_value(model, image, superpixels, z, &color, class))
        .collect::<Result<Vec<_>>>()?;
    let (intercept, weights) = lime_fit(&masks, &targets, config.kernel_width, config.ridge)?;

    let mut order: Vec<usize> = (0..m).filter(|&i| weights[i] > 0.0).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    let mut highlight = vec![false; m];
    for &i in order.iter().take(config.top_k) {
        highlight[i] = true;
    }
    Ok(LimeExplanation {
        attribution: Attribution {
            weights,
            class,
            method: Method::Lime,
            baseline: baseline.describe(),
        },
        intercept,
        highlight,
    })
}
