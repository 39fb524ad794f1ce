//! Superpixel-level explanations of a classifier's prediction.
//!
//! Both explainers treat the image as a set of superpixels. A [`MaskSample`]
//! says which superpixels are kept; dropped ones are painted with a baseline
//! colour before the model is queried.

mod lime;
mod linalg;
mod render;
mod shap;
mod superpixel;

pub use lime::{lime_explain, lime_fit, LimeConfig, LimeExplanation};
pub use linalg::{solve, weighted_least_squares};
pub use render::{render_lime, render_shap};
pub use shap::{exact_shapley, kernel_shap, kernel_shap_values, shapley_kernel_weight, MAX_EXACT_PLAYERS};
pub use superpixel::{slic_superpixels, SlicParams, SuperpixelMap};

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::Image;

/// Inclusion flag per superpixel.
pub type MaskSample = Vec<bool>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lime,
    KernelShap,
    ExactShapley,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Lime => "lime",
            Method::KernelShap => "kernel_shap",
            Method::ExactShapley => "exact_shapley",
        }
    }
}

/// Colour painted over excluded superpixels.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    /// Per-channel mean of the explained image.
    #[default]
    MeanColor,
    /// The same value in every channel.
    Gray(u8),
}

impl Baseline {
    pub fn color(&self, image: &Image) -> Vec<u8> {
        match self {
            Baseline::MeanColor => image.mean_color(),
            Baseline::Gray(v) => vec![*v; image.channels()],
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Baseline::MeanColor => "mean_color".into(),
            Baseline::Gray(v) => format!("gray_{v}"),
        }
    }
}

/// Per-superpixel weights for one class.
#[derive(Clone, Debug, PartialEq)]
pub struct Attribution {
    pub weights: Vec<f64>,
    pub class: usize,
    pub method: Method,
    pub baseline: String,
}

impl Attribution {
    /// `segment_id,weight` rows, then `class,<k>` and `method,<tag>`.
    /// Weights use the shortest round-trip decimal form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("segment_id,weight\n");
        for (i, w) in self.weights.iter().enumerate() {
            let _ = writeln!(out, "{i},{w}");
        }
        let _ = writeln!(out, "class,{}", self.class);
        let _ = writeln!(out, "method,{}", self.method.tag());
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut weights = Vec::new();
        let mut class = None;
        let mut method = None;
        for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
            let (key, value) = line
                .split_once(',')
                .ok_or_else(|| Error::Data(format!("malformed attribution line `{line}`")))?;
            match key {
                "class" => class = value.parse().ok(),
                "method" => {
                    method = match value {
                        "lime" => Some(Method::Lime),
                        "kernel_shap" => Some(Method::KernelShap),
                        "exact_shapley" => Some(Method::ExactShapley),
                        _ => None,
                    }
                }
                id => {
                    let id: usize = id
                        .parse()
                        .map_err(|_| Error::Data(format!("bad segment id `{id}`")))?;
                    if id != weights.len() {
                        return Err(Error::Data(format!("segment id {id} out of order")));
                    }
                    weights.push(
                        value
                            .parse()
                            .map_err(|_| Error::Data(format!("bad weight `{value}`")))?,
                    );
                }
            }
        }
        Ok(Self {
            weights,
            class: class.ok_or_else(|| Error::Data("missing class trailer".into()))?,
            method: method.ok_or_else(|| Error::Data("missing method trailer".into()))?,
            baseline: String::new(),
        })
    }
}

/// Replaces every pixel of an excluded superpixel with `baseline`.
pub fn perturb(
    image: &Image,
    superpixels: &SuperpixelMap,
    mask: &[bool],
    baseline: &[u8],
) -> Result<Image> {
    if mask.len() != superpixels.count {
        return Err(Error::Dimension(format!(
            "mask has {} entries for {} superpixels",
            mask.len(),
            superpixels.count
        )));
    }
    if image.width() != superpixels.width || image.height() != superpixels.height {
        return Err(Error::Dimension("superpixel map and image sizes differ".into()));
    }
    if baseline.len() != image.channels() {
        return Err(Error::Dimension("baseline colour channel count".into()));
    }
    let c = image.channels();
    let mut out = image.clone();
    for (px, &label) in out.pixels_mut().chunks_exact_mut(c).zip(&superpixels.labels) {
        if !mask[label] {
            px.copy_from_slice(baseline);
        }
    }
    Ok(out)
}

/// Probability of `class` for the image with only `mask`'s superpixels kept.
fn class_value(
    model: &dyn Fn(&Image) -> Result<Vec<f64>>,
    image: &Image,
    superpixels: &SuperpixelMap,
    mask: &[bool],
    baseline: &[u8],
    class: usize,
) -> Result<f64> {
    let probs = model(&perturb(image, superpixels, mask, baseline)?)?;
    let v = *probs.get(class).ok_or_else(|| {
        Error::Parameter(format!("class {class} out of range for {} outputs", probs.len()))
    })?;
    if !v.is_finite() {
        return Err(Error::Data(format!("model returned non-finite output {v}")));
    }
    Ok(v)
}
