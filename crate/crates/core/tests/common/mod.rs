//! Helpers shared by the integration targets.
#![allow(dead_code)]

use grainforge::network::{backward, forward, loss, one_hot, Activation};
use grainforge::{LayerSpec, NetworkSpec, Parameters, Rng, Tensor};

/// Finite-difference step for the gradient check.
pub const FD_STEP: f64 = 1e-5;
/// Relative errors are taken against `max(|analytic|, |numeric|, FD_FLOOR)`
/// so that coordinates whose true gradient is ~0 are judged absolutely.
pub const FD_FLOOR: f64 = 1e-6;

/// Small 8×8×1 networks covering every layer kind and activation.
pub fn mini_networks() -> Vec<(&'static str, NetworkSpec)> {
    let two_conv = NetworkSpec::new(
        [8, 8, 1],
        vec![
            LayerSpec::conv(3),
            LayerSpec::MaxPool2d,
            LayerSpec::conv(4),
            LayerSpec::Flatten,
            LayerSpec::dense(3, Activation::Softmax),
        ],
        3,
    )
    .unwrap();
    let hidden_dense = NetworkSpec::new(
        [8, 8, 1],
        vec![
            LayerSpec::conv(2),
            LayerSpec::MaxPool2d,
            LayerSpec::Flatten,
            LayerSpec::dense(5, Activation::Relu),
            LayerSpec::dense(4, Activation::None),
            LayerSpec::dense(3, Activation::Softmax),
        ],
        3,
    )
    .unwrap();
    let linear_conv = NetworkSpec::new(
        [8, 8, 1],
        vec![
            LayerSpec::Conv2d { filters: 2, activation: Activation::None },
            LayerSpec::conv(2),
            LayerSpec::MaxPool2d,
            LayerSpec::Flatten,
            LayerSpec::dense(3, Activation::Softmax),
        ],
        3,
    )
    .unwrap();
    vec![("two_conv", two_conv), ("hidden_dense", hidden_dense), ("linear_conv", linear_conv)]
}

fn coordinate(p: &mut Parameters<f64>, layer: usize, which: usize, i: usize) -> &mut f64 {
    let t = if which == 0 { &mut p.layers[layer].weights } else { &mut p.layers[layer].bias };
    &mut t.data_mut()[i]
}

pub struct GradCheck {
    pub max_rel_error: f64,
    pub coordinates: usize,
}

/// Compares analytic gradients with central differences for every scalar
/// parameter on a seeded random batch.
pub fn gradient_check(spec: &NetworkSpec, lambda: f64, seed: u64) -> GradCheck {
    let mut rng = Rng::new(seed);
    let mut params = Parameters::<f64>::init(spec, &mut rng).unwrap();
    // non-zero biases so bias gradients are exercised away from init
    for layer in &mut params.layers {
        for b in layer.bias.data_mut() {
            *b = 0.1 * rng.normal();
        }
    }
    let [h, w, c] = spec.input_shape;
    let batch_size = 4;
    let batch = Tensor::from_fn(&[batch_size, h, w, c], |_| rng.uniform());
    let labels: Vec<usize> = (0..batch_size).map(|_| rng.below(spec.classes)).collect();
    let onehot = one_hot::<f64>(&labels, spec.classes).unwrap();

    let objective = |p: &Parameters<f64>| {
        let pass = forward(spec, p, &batch).unwrap();
        loss(&pass.probabilities, &onehot, p, lambda).unwrap()
    };
    let pass = forward(spec, &params, &batch).unwrap();
    let analytic = backward(spec, &params, &pass, &onehot, lambda).unwrap();

    let mut worst = 0.0f64;
    let mut coordinates = 0;
    for l in 0..params.layers.len() {
        for which in 0..2 {
            let n = if which == 0 {
                params.layers[l].weights.len()
            } else {
                params.layers[l].bias.len()
            };
            for i in 0..n {
                let original = *coordinate(&mut params, l, which, i);
                *coordinate(&mut params, l, which, i) = original + FD_STEP;
                let up = objective(&params);
                *coordinate(&mut params, l, which, i) = original - FD_STEP;
                let down = objective(&params);
                *coordinate(&mut params, l, which, i) = original;
                let numeric = (up - down) / (2.0 * FD_STEP);
                let a = if which == 0 {
                    analytic.layers[l].weights.data()[i]
                } else {
                    analytic.layers[l].bias.data()[i]
                };
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(FD_FLOOR);
                worst = worst.max(rel);
                coordinates += 1;
            }
        }
    }
    GradCheck { max_rel_error: worst, coordinates }
}
