use super::params::Parameters;
use super::spec::{Activation, LayerSpec, NetworkSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{
    conv2d_backward_into, conv2d_forward, dense_backward_into, dense_forward, maxpool2d_backward,
    maxpool2d_forward, relu_backward, softmax, Tensor,
};

/// Log clamp for the cross-entropy.
pub const LOG_EPSILON: f64 = 1e-12;

/// Per-sample forward cache. `outputs[0]` is the input, `outputs[i + 1]` the
/// post-activation output of layer `i`.
#[derive(Clone, Debug)]
pub struct Activations<T> {
    pub outputs: Vec<Tensor<T>>,
    argmax: Vec<Option<Vec<usize>>>,
}

impl<T: Scalar> Activations<T> {
    pub fn probabilities(&self) -> &Tensor<T> {
        self.outputs.last().expect("at least the input")
    }
}

#[derive(Clone, Debug)]
pub struct ForwardPass<T> {
    /// `B×K`.
    pub probabilities: Tensor<T>,
    pub samples: Vec<Activations<T>>,
}

fn activate<T: Scalar>(mut x: Tensor<T>, activation: Activation) -> Tensor<T> {
    match activation {
        Activation::Relu => {
            x.data_mut()
                .iter_mut()
                .for_each(|v| *v = v.max(T::zero()));
            x
        }
        Activation::Softmax => softmax(&x),
        Activation::None => x,
    }
}

/// Runs one `H×W×C` sample through the network, keeping what backward needs.
pub fn forward_sample<T: Scalar>(
    spec: &NetworkSpec,
    params: &Parameters<T>,
    input: &Tensor<T>,
) -> Result<Activations<T>> {
    if input.shape() != spec.input_shape {
        return Err(Error::Dimension(format!(
            "sample shape {:?} does not match network input {:?}",
            input.shape(),
            spec.input_shape
        )));
    }
    let mut outputs = Vec::with_capacity(spec.layers.len() + 1);
    let mut argmax = Vec::with_capacity(spec.layers.len());
    outputs.push(input.clone());
    let mut param_layers = params.layers.iter();
    for layer in &spec.layers {
        let x = outputs.last().expect("non-empty");
        let (y, arg) = match *layer {
            LayerSpec::Conv2d { activation, .. } => {
                let p = param_layers.next().ok_or_else(missing_params)?;
                let y = conv2d_forward(x, &p.weights, &p.bias)?;
                (activate(y, activation), None)
            }
            LayerSpec::MaxPool2d => {
                let pooled = maxpool2d_forward(x)?;
                (pooled.output, Some(pooled.argmax))
            }
            LayerSpec::Flatten => {
                let n = x.len();
                (x.clone().reshape(&[n])?, None)
            }
            LayerSpec::Dense { activation, .. } => {
                let p = param_layers.next().ok_or_else(missing_params)?;
                let y = dense_forward(x, &p.weights, &p.bias)?;
                (activate(y, activation), None)
            }
        };
        outputs.push(y);
        argmax.push(arg);
    }
    Ok(Activations { outputs, argmax })
}

fn missing_params() -> Error {
    Error::Dimension("fewer parameter tensors than parametric layers".into())
}

/// Class probabilities for one sample.
pub fn predict<T: Scalar>(
    spec: &NetworkSpec,
    params: &Parameters<T>,
    input: &Tensor<T>,
) -> Result<Tensor<T>> {
    let mut acts = forward_sample(spec, params, input)?;
    Ok(acts.outputs.pop().expect("non-empty"))
}

/// Forward pass over a `B×H×W×C` batch.
pub fn forward<T: Scalar>(
    spec: &NetworkSpec,
    params: &Parameters<T>,
    batch: &Tensor<T>,
) -> Result<ForwardPass<T>> {
    let shape = batch.shape();
    if shape.len() != 4 || shape[1..] != spec.input_shape {
        return Err(Error::Dimension(format!(
            "batch shape {shape:?} does not match B×{:?}",
            spec.input_shape
        )));
    }
    let b = shape[0];
    let sample_len: usize = spec.input_shape.iter().product();
    let mut probs = Vec::with_capacity(b * spec.classes);
    let mut samples = Vec::with_capacity(b);
    for chunk in batch.data().chunks_exact(sample_len) {
        let x = Tensor::new(spec.input_shape.to_vec(), chunk.to_vec())?;
        let acts = forward_sample(spec, params, &x)?;
        probs.extend_from_slice(acts.probabilities().data());
        samples.push(acts);
    }
    Ok(ForwardPass {
        probabilities: Tensor::new(vec![b, spec.classes], probs)?,
        samples,
    })
}

/// Row-wise one-hot encoding.
pub fn one_hot<T: Scalar>(labels: &[usize], classes: usize) -> Result<Tensor<T>> {
    let mut data = vec![T::zero(); labels.len() * classes];
    for (i, &l) in labels.iter().enumerate() {
        if l >= classes {
            return Err(Error::Parameter(format!("label {l} outside {classes} classes")));
        }
        data[i * classes + l] = T::one();
    }
    Tensor::new(vec![labels.len(), classes], data)
}

/// Mean categorical cross-entropy plus `λ·Σw²` over weights.
pub fn loss<T: Scalar>(
    probabilities: &Tensor<T>,
    onehot: &Tensor<T>,
    params: &Parameters<T>,
    lambda: f64,
) -> Result<T> {
    if probabilities.shape() != onehot.shape() || probabilities.rank() != 2 {
        return Err(Error::Dimension(format!(
            "probabilities {:?} and labels {:?} must both be B×K",
            probabilities.shape(),
            onehot.shape()
        )));
    }
    let b = probabilities.shape()[0];
    let eps = T::of(LOG_EPSILON);
    let ce: T = probabilities
        .data()
        .iter()
        .zip(onehot.data())
        .filter(|(_, &y)| y != T::zero())
        .map(|(&p, &y)| -y * p.max(eps).ln())
        .sum();
    let mut total = ce / T::of(b as f64);
    if lambda != 0.0 {
        total = total + T::of(lambda) * params.weight_penalty();
    }
    Ok(total)
}

/// Accumulates `scale`-weighted data gradients of one sample into `grads`.
///
/// The softmax/cross-entropy pair is differentiated jointly: the logit
/// gradient is `(p − y)·scale`.
pub fn backward_sample<T: Scalar>(
    spec: &NetworkSpec,
    params: &Parameters<T>,
    acts: &Activations<T>,
    target: &[T],
    scale: T,
    grads: &mut Parameters<T>,
) -> Result<()> {
    let probs = acts.probabilities();
    if target.len() != probs.len() {
        return Err(Error::Dimension(format!(
            "target has {} entries, network emits {}",
            target.len(),
            probs.len()
        )));
    }
    let delta = probs
        .data()
        .iter()
        .zip(target)
        .map(|(&p, &y)| (p - y) * scale)
        .collect();
    let mut grad = Tensor::vector(delta);
    let first_param = spec
        .layers
        .iter()
        .position(LayerSpec::has_params)
        .unwrap_or(0);
    let last = spec.layers.len() - 1;
    let mut pi = params.layers.len();
    for i in (first_param..spec.layers.len()).rev() {
        let input = &acts.outputs[i];
        let output = &acts.outputs[i + 1];
        let want_input = i > first_param;
        grad = match spec.layers[i] {
            LayerSpec::Conv2d { activation, .. } | LayerSpec::Dense { activation, .. } => {
                pi -= 1;
                if i != last && activation == Activation::Relu {
                    relu_backward(output, &mut grad);
                }
                let p = &params.layers[pi];
                let g = &mut grads.layers[pi];
                if matches!(spec.layers[i], LayerSpec::Conv2d { .. }) {
                    let mut gi = want_input.then(|| Tensor::zeros(input.shape()));
                    conv2d_backward_into(
                        input,
                        &p.weights,
                        &grad,
                        gi.as_mut(),
                        &mut g.weights,
                        &mut g.bias,
                    )?;
                    match gi {
                        Some(gi) => gi,
                        None => break,
                    }
                } else {
                    match dense_backward_into(
                        input,
                        &p.weights,
                        &grad,
                        want_input,
                        &mut g.weights,
                        &mut g.bias,
                    )? {
                        Some(gi) => gi,
                        None => break,
                    }
                }
            }
            LayerSpec::MaxPool2d => {
                let argmax = acts.argmax[i].as_deref().expect("pool layer cached argmax");
                maxpool2d_backward(input.shape(), argmax, &grad)?
            }
            LayerSpec::Flatten => grad.reshape(input.shape())?,
        };
    }
    Ok(())
}

/// Gradients of [`loss`] with respect to every parameter.
pub fn backward<T: Scalar>(
    spec: &NetworkSpec,
    params: &Parameters<T>,
    pass: &ForwardPass<T>,
    onehot: &Tensor<T>,
    lambda: f64,
) -> Result<Parameters<T>> {
    let b = pass.samples.len();
    if onehot.shape() != [b, spec.classes] {
        return Err(Error::Dimension(format!(
            "labels {:?} do not match {b}×{}",
            onehot.shape(),
            spec.classes
        )));
    }
    let mut grads = params.zeros_like();
    let scale = T::one() / T::of(b as f64);
    for (acts, target) in pass
        .samples
        .iter()
        .zip(onehot.data().chunks_exact(spec.classes))
    {
        backward_sample(spec, params, acts, target, scale, &mut grads)?;
    }
    add_weight_decay(params, &mut grads, lambda);
    Ok(grads)
}

/// Adds the L2 term `2λw` to weight gradients.
pub(crate) fn add_weight_decay<T: Scalar>(
    params: &Parameters<T>,
    grads: &mut Parameters<T>,
    lambda: f64,
) {
    if lambda == 0.0 {
        return;
    }
    let two_lambda = T::of(2.0 * lambda);
    for (g, p) in grads.layers.iter_mut().zip(&params.layers) {
        g.weights.add_scaled(&p.weights, two_lambda);
    }
}
