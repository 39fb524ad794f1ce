use super::spec::{Activation, LayerSpec, NetworkSpec};
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

#[derive(Clone, Debug, PartialEq)]
pub struct LayerParams<T> {
    pub weights: Tensor<T>,
    pub bias: Tensor<T>,
}

/// Weights and biases of every conv/dense layer in spec order. Gradients
/// share this representation.
#[derive(Clone, Debug, PartialEq)]
pub struct Parameters<T> {
    pub layers: Vec<LayerParams<T>>,
}

impl<T: Scalar> Parameters<T> {
    pub fn zeros(spec: &NetworkSpec) -> Result<Self> {
        Ok(Self {
            layers: spec
                .param_shapes()?
                .into_iter()
                .map(|(w, b)| LayerParams {
                    weights: Tensor::zeros(&w),
                    bias: Tensor::zeros(&b),
                })
                .collect(),
        })
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self
                .layers
                .iter()
                .map(|l| LayerParams {
                    weights: Tensor::zeros(l.weights.shape()),
                    bias: Tensor::zeros(l.bias.shape()),
                })
                .collect(),
        }
    }

    /// He-normal weights for ReLU/linear layers, Glorot-uniform for the
    /// softmax layer, zero biases.
    pub fn init(spec: &NetworkSpec, rng: &mut Rng) -> Result<Self> {
        let mut params = Self::zeros(spec)?;
        let parametric = spec.layers.iter().filter(|l| l.has_params());
        for (layer, p) in parametric.zip(params.layers.iter_mut()) {
            let shape = p.weights.shape().to_vec();
            let (fan_in, fan_out) = match layer {
                LayerSpec::Conv2d { .. } => {
                    let area = shape[0] * shape[1];
                    (area * shape[2], area * shape[3])
                }
                _ => (shape[0], shape[1]),
            };
            let data = p.weights.data_mut();
            if layer.activation() == Activation::Softmax {
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                data.iter_mut()
                    .for_each(|w| *w = T::of(rng.uniform_range(-limit, limit)));
            } else {
                let std = (2.0 / fan_in as f64).sqrt();
                data.iter_mut().for_each(|w| *w = T::of(std * rng.normal()));
            }
        }
        Ok(params)
    }

    /// Checks tensor shapes against the spec.
    pub fn check(&self, spec: &NetworkSpec) -> Result<()> {
        let shapes = spec.param_shapes()?;
        if shapes.len() != self.layers.len() {
            return Err(Error::Dimension(format!(
                "spec has {} parametric layers, parameters have {}",
                shapes.len(),
                self.layers.len()
            )));
        }
        for (i, ((w, b), p)) in shapes.iter().zip(&self.layers).enumerate() {
            if p.weights.shape() != w.as_slice() || p.bias.shape() != b.as_slice() {
                return Err(Error::Dimension(format!(
                    "parameter layer {i}: expected {w:?}/{b:?}, got {:?}/{:?}",
                    p.weights.shape(),
                    p.bias.shape()
                )));
            }
        }
        Ok(())
    }

    pub fn scalar_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// `(name, tensor)` pairs in storage order.
    pub fn named_tensors(&self) -> Vec<(String, &Tensor<T>)> {
        self.layers
            .iter()
            .enumerate()
            .flat_map(|(i, l)| {
                [
                    (format!("layers.{i}.weight"), &l.weights),
                    (format!("layers.{i}.bias"), &l.bias),
                ]
            })
            .collect()
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut Tensor<T>> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.weights, &mut l.bias])
    }

    /// `Σ w²` over weights only.
    pub fn weight_penalty(&self) -> T {
        self.layers.iter().map(|l| l.weights.sum_squares()).sum()
    }

    pub fn cast<U: Scalar>(&self) -> Parameters<U> {
        Parameters {
            layers: self
                .layers
                .iter()
                .map(|l| LayerParams {
                    weights: l.weights.cast(),
                    bias: l.bias.cast(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::spec::{build_rice_cnn, param_count};

    #[test]
    fn init_is_seeded_and_well_shaped() {
        let spec = build_rice_cnn();
        let a = Parameters::<f32>::init(&spec, &mut Rng::new(3)).unwrap();
        let b = Parameters::<f32>::init(&spec, &mut Rng::new(3)).unwrap();
        assert_eq!(a, b);
        a.check(&spec).unwrap();
        assert_eq!(a.scalar_count(), param_count(&spec).unwrap());
        assert!(a.layers.iter().all(|l| l.bias.data().iter().all(|&v| v == 0.0)));
        // Glorot limit for the 32→5 softmax layer
        let limit = (6.0f32 / 37.0).sqrt();
        assert!(a.layers[3].weights.data().iter().all(|w| w.abs() <= limit));
        // He std for the first conv: sqrt(2/27)
        let w = a.layers[0].weights.data();
        let var = w.iter().map(|v| v * v).sum::<f32>() / w.len() as f32;
        assert!((var - 2.0 / 27.0).abs() < 0.02, "{var}");
    }
}
