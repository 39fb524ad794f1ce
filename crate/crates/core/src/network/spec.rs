use serde::{Deserialize, Serialize};

use super::KERNEL_SIZE;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Softmax,
    None,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    /// 3×3 valid convolution, stride 1.
    Conv2d {
        filters: usize,
        activation: Activation,
    },
    /// 2×2 window, stride 2.
    #[serde(rename = "maxpool2d")]
    MaxPool2d,
    Flatten,
    Dense {
        units: usize,
        activation: Activation,
    },
}

impl LayerSpec {
    pub fn conv(filters: usize) -> Self {
        LayerSpec::Conv2d {
            filters,
            activation: Activation::Relu,
        }
    }

    pub fn dense(units: usize, activation: Activation) -> Self {
        LayerSpec::Dense { units, activation }
    }

    pub fn has_params(&self) -> bool {
        matches!(self, LayerSpec::Conv2d { .. } | LayerSpec::Dense { .. })
    }

    pub fn activation(&self) -> Activation {
        match *self {
            LayerSpec::Conv2d { activation, .. } | LayerSpec::Dense { activation, .. } => {
                activation
            }
            _ => Activation::None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    /// `[H, W, C]`.
    pub input_shape: [usize; 3],
    pub layers: Vec<LayerSpec>,
    pub classes: usize,
}

impl NetworkSpec {
    pub fn new(input_shape: [usize; 3], layers: Vec<LayerSpec>, classes: usize) -> Result<Self> {
        let spec = Self {
            input_shape,
            layers,
            classes,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Output shape of every layer, in order.
    pub fn layer_shapes(&self) -> Result<Vec<Vec<usize>>> {
        if self.input_shape.contains(&0) {
            return Err(Error::Dimension(format!(
                "input shape {:?} has a zero axis",
                self.input_shape
            )));
        }
        let mut shape = self.input_shape.to_vec();
        let mut out = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            shape = match *layer {
                LayerSpec::Conv2d { filters, .. } => {
                    if shape.len() != 3 {
                        return Err(Error::Dimension(format!(
                            "layer {i}: conv2d needs an H×W×C input, got {shape:?}"
                        )));
                    }
                    if shape[0] < KERNEL_SIZE || shape[1] < KERNEL_SIZE || filters == 0 {
                        return Err(Error::Dimension(format!(
                            "layer {i}: conv2d cannot apply to {shape:?} with {filters} filters"
                        )));
                    }
                    vec![shape[0] - KERNEL_SIZE + 1, shape[1] - KERNEL_SIZE + 1, filters]
                }
                LayerSpec::MaxPool2d => {
                    if shape.len() != 3 || shape[0] < 2 || shape[1] < 2 {
                        return Err(Error::Dimension(format!(
                            "layer {i}: maxpool2d cannot apply to {shape:?}"
                        )));
                    }
                    vec![shape[0] / 2, shape[1] / 2, shape[2]]
                }
                LayerSpec::Flatten => vec![shape.iter().product()],
                LayerSpec::Dense { units, .. } => {
                    if shape.len() != 1 {
                        return Err(Error::Dimension(format!(
                            "layer {i}: dense needs a flattened input, got {shape:?}"
                        )));
                    }
                    if units == 0 {
                        return Err(Error::Dimension(format!("layer {i}: dense with 0 units")));
                    }
                    vec![units]
                }
            };
            out.push(shape.clone());
        }
        Ok(out)
    }

    /// `(weight shape, bias shape)` for each parametric layer, in order.
    pub fn param_shapes(&self) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
        let shapes = self.layer_shapes()?;
        let mut input = self.input_shape.to_vec();
        let mut out = Vec::new();
        for (layer, output) in self.layers.iter().zip(&shapes) {
            match *layer {
                LayerSpec::Conv2d { filters, .. } => out.push((
                    vec![KERNEL_SIZE, KERNEL_SIZE, input[2], filters],
                    vec![filters],
                )),
                LayerSpec::Dense { units, .. } => out.push((vec![input[0], units], vec![units])),
                _ => {}
            }
            input = output.clone();
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Parameter("network has no layers".into()));
        }
        let shapes = self.layer_shapes()?;
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            if i != last && layer.activation() == Activation::Softmax {
                return Err(Error::Parameter(format!(
                    "layer {i}: softmax is only allowed on the output layer"
                )));
            }
        }
        match self.layers[last] {
            LayerSpec::Dense {
                units,
                activation: Activation::Softmax,
            } if units == self.classes && shapes[last] == [units] => Ok(()),
            _ => Err(Error::Parameter(format!(
                "final layer must be dense softmax with {} units",
                self.classes
            ))),
        }
    }
}

/// Trainable scalar count.
pub fn param_count(spec: &NetworkSpec) -> Result<usize> {
    Ok(spec
        .param_shapes()?
        .iter()
        .map(|(w, b)| w.iter().product::<usize>() + b.iter().product::<usize>())
        .sum())
}

/// 50×50×3 rice-grain classifier with five output classes.
pub fn build_rice_cnn() -> NetworkSpec {
    NetworkSpec::new(
        [50, 50, 3],
        vec![
            LayerSpec::conv(32),
            LayerSpec::MaxPool2d,
            LayerSpec::conv(64),
            LayerSpec::MaxPool2d,
            LayerSpec::Flatten,
            LayerSpec::dense(32, Activation::Relu),
            LayerSpec::dense(5, Activation::Softmax),
        ],
        5,
    )
    .expect("rice architecture is valid")
}

/// 224×224×3 leaf-disease classifier with four output classes.
pub fn build_disease_cnn() -> NetworkSpec {
    NetworkSpec::new(
        [224, 224, 3],
        vec![
            LayerSpec::conv(32),
            LayerSpec::MaxPool2d,
            LayerSpec::conv(64),
            LayerSpec::MaxPool2d,
            LayerSpec::conv(64),
            LayerSpec::MaxPool2d,
            LayerSpec::Flatten,
            LayerSpec::dense(128, Activation::Relu),
            LayerSpec::dense(4, Activation::Softmax),
        ],
        4,
    )
    .expect("disease architecture is valid")
}
