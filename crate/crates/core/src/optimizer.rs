//! SGD, Adam and Adamax parameter updates.
//!
//! L2 regularisation reaches the optimizer through the loss gradient, so all
//! three rules see the penalised gradient unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::Parameters;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Sgd,
    Adam,
    Adamax,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Ok(Algorithm::Sgd),
            "adam" => Ok(Algorithm::Adam),
            "adamax" => Ok(Algorithm::Adamax),
            other => Err(Error::Parameter(format!("unknown optimizer `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl OptimizerConfig {
    pub fn new(algorithm: Algorithm, learning_rate: f64) -> Self {
        Self {
            algorithm,
            learning_rate,
            ..Self::default()
        }
    }
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Adam,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OptimizerState<T> {
    config: OptimizerConfig,
    /// First-moment estimates (Adam, Adamax).
    first: Option<Parameters<T>>,
    /// Second moment (Adam) or infinity norm (Adamax).
    second: Option<Parameters<T>>,
    step: u64,
}

impl<T: Scalar> OptimizerState<T> {
    pub fn new(config: OptimizerConfig) -> Result<Self> {
        let c = &config;
        if !(c.learning_rate >= 0.0 && c.learning_rate.is_finite()) {
            return Err(Error::Parameter(format!(
                "learning rate must be ≥ 0, got {}",
                c.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&c.beta1) || !(0.0..1.0).contains(&c.beta2) || !(c.epsilon > 0.0) {
            return Err(Error::Parameter(format!(
                "need 0 ≤ β1, β2 < 1 and ε > 0, got β1={} β2={} ε={}",
                c.beta1, c.beta2, c.epsilon
            )));
        }
        Ok(Self {
            config,
            first: None,
            second: None,
            step: 0,
        })
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    /// Number of completed steps.
    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn step(&mut self, params: &mut Parameters<T>, grads: &Parameters<T>) -> Result<()> {
        if params.layers.len() != grads.layers.len() {
            return Err(Error::Dimension(format!(
                "{} parameter layers but {} gradient layers",
                params.layers.len(),
                grads.layers.len()
            )));
        }
        for ((name, g), (_, p)) in grads.named_tensors().into_iter().zip(params.named_tensors()) {
            if g.shape() != p.shape() {
                return Err(Error::Dimension(format!(
                    "gradient `{name}` shape {:?} differs from parameter {:?}",
                    g.shape(),
                    p.shape()
                )));
            }
            if !g.is_finite() {
                return Err(Error::NonFinite(name));
            }
        }
        self.step += 1;
        let c = self.config;
        let lr = T::of(c.learning_rate);
        match c.algorithm {
            Algorithm::Sgd => {
                for (p, g) in params.tensors_mut().zip(grad_tensors(grads)) {
                    p.add_scaled(g, -lr);
                }
            }
            Algorithm::Adam | Algorithm::Adamax => {
                let first = self.first.get_or_insert_with(|| params.zeros_like());
                let second = self.second.get_or_insert_with(|| params.zeros_like());
                let (b1, b2, eps) = (T::of(c.beta1), T::of(c.beta2), T::of(c.epsilon));
                let one = T::one();
                let t = i32::try_from(self.step).unwrap_or(i32::MAX);
                let bc1 = one - b1.powi(t);
                let bc2 = one - b2.powi(t);
                let tensors = params
                    .tensors_mut()
                    .zip(grad_tensors(grads))
                    .zip(first.tensors_mut().zip(second.tensors_mut()));
                for ((p, g), (m, v)) in tensors {
                    let it = p
                        .data_mut()
                        .iter_mut()
                        .zip(g.data())
                        .zip(m.data_mut().iter_mut().zip(v.data_mut()));
                    if c.algorithm == Algorithm::Adam {
                        for ((w, &g), (m, v)) in it {
                            *m = b1 * *m + (one - b1) * g;
                            *v = b2 * *v + (one - b2) * g * g;
                            let m_hat = *m / bc1;
                            let v_hat = *v / bc2;
                            *w = *w - lr * m_hat / (v_hat.sqrt() + eps);
                        }
                    } else {
                        let step_size = lr / bc1;
                        for ((w, &g), (m, u)) in it {
                            *m = b1 * *m + (one - b1) * g;
                            *u = (b2 * *u).max(g.abs());
                            *w = *w - step_size * *m / (*u + eps);
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn grad_tensors<T: Scalar>(grads: &Parameters<T>) -> impl Iterator<Item = &crate::tensor::Tensor<T>> {
    grads.layers.iter().flat_map(|l| [&l.weights, &l.bias])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::LayerParams;
    use crate::tensor::Tensor;

    fn scalar_params(w: f64) -> Parameters<f64> {
        Parameters {
            layers: vec![LayerParams {
                weights: Tensor::vector(vec![w]),
                bias: Tensor::vector(vec![0.0]),
            }],
        }
    }

    fn random_params(seed: u64) -> Parameters<f64> {
        let mut rng = crate::rng::Rng::new(seed);
        Parameters {
            layers: vec![LayerParams {
                weights: Tensor::from_fn(&[3, 4], |_| rng.normal()),
                bias: Tensor::from_fn(&[4], |_| rng.normal()),
            }],
        }
    }

    #[test]
    fn zero_gradients_leave_parameters_unchanged() {
        for algorithm in [Algorithm::Sgd, Algorithm::Adam, Algorithm::Adamax] {
            let mut opt = OptimizerState::new(OptimizerConfig::new(algorithm, 0.1)).unwrap();
            let mut p = random_params(1);
            let before = p.clone();
            let zeros = p.zeros_like();
            opt.step(&mut p, &zeros).unwrap();
            assert_eq!(p, before, "{algorithm:?}");
            assert_eq!(opt.steps(), 1);
        }
    }

    #[test]
    fn first_adam_step_has_magnitude_alpha() {
        let alpha = 0.01;
        for g in [1e-3, 0.5, 7.0, -250.0] {
            let mut opt = OptimizerState::new(OptimizerConfig::new(Algorithm::Adam, alpha)).unwrap();
            let mut p = scalar_params(1.0);
            let mut grads = p.zeros_like();
            grads.layers[0].weights.fill(g);
            opt.step(&mut p, &grads).unwrap();
            let delta = p.layers[0].weights.data()[0] - 1.0;
            // |Δw| = α·|g|/(|g| + ε)
            let expect = alpha * g.abs() / (g.abs() + 1e-8);
            assert!((delta.abs() - expect).abs() < 1e-15);
            assert!((delta.abs() - alpha).abs() < alpha * 1e-5);
            assert_eq!(delta.signum(), -g.signum());
        }
    }

    #[test]
    fn adam_first_step_is_scale_invariant() {
        let base = random_params(2);
        let grads = random_params(3);
        let run = |c: f64| {
            let mut opt = OptimizerState::new(OptimizerConfig::new(Algorithm::Adam, 0.05)).unwrap();
            let mut p = base.clone();
            let mut g = grads.clone();
            g.tensors_mut().for_each(|t| *t = t.map(|v| v * c));
            opt.step(&mut p, &g).unwrap();
            p
        };
        let a = run(1.0);
        for c in [1e-3, 3.0, 1e4] {
            let b = run(c);
            let pairs = a.named_tensors().into_iter().zip(b.named_tensors()).zip(grads.named_tensors());
            for (((_, x), (_, y)), (_, g)) in pairs {
                for ((u, v), g) in x.data().iter().zip(y.data()).zip(g.data()) {
                    // invariance is exact up to the ε/|g| term
                    let tol = 2.0 * 0.05 * 1e-8 / (c.min(1.0) * g.abs()) + 1e-15;
                    assert!((u - v).abs() < tol, "{u} {v} c={c}");
                }
            }
        }
    }

    #[test]
    fn adam_minimises_a_scalar_quadratic() {
        let mut opt = OptimizerState::new(OptimizerConfig::new(Algorithm::Adam, 0.05)).unwrap();
        let mut p = scalar_params(0.0);
        for _ in 0..200 {
            let w = p.layers[0].weights.data()[0];
            let mut g = p.zeros_like();
            g.layers[0].weights.fill(2.0 * (w - 3.0));
            opt.step(&mut p, &g).unwrap();
        }
        assert_eq!(opt.steps(), 200);
        let w = p.layers[0].weights.data()[0];
        assert!((w - 3.0).abs() < 1e-2, "{w}");
    }

    #[test]
    fn adamax_first_step_and_descent() {
        let mut opt = OptimizerState::new(OptimizerConfig::new(Algorithm::Adamax, 0.05)).unwrap();
        let mut p = scalar_params(0.0);
        let mut g = p.zeros_like();
        g.layers[0].weights.fill(-4.0);
        opt.step(&mut p, &g).unwrap();
        // m = 0.1·g, u = |g|, step = α/(1−β1)·m/(u+ε)
        let expect = 0.05 / 0.1 * (0.1 * 4.0) / (4.0 + 1e-8);
        assert!((p.layers[0].weights.data()[0] - expect).abs() < 1e-12);
        for _ in 0..300 {
            let w = p.layers[0].weights.data()[0];
            g.layers[0].weights.fill(2.0 * (w - 3.0));
            opt.step(&mut p, &g).unwrap();
        }
        assert!((p.layers[0].weights.data()[0] - 3.0).abs() < 5e-2);
    }

    #[test]
    fn sgd_is_exact() {
        let mut opt = OptimizerState::new(OptimizerConfig::new(Algorithm::Sgd, 0.25)).unwrap();
        let mut p = random_params(4);
        let g = random_params(5);
        let expect: Vec<f64> = p.layers[0]
            .weights
            .data()
            .iter()
            .zip(g.layers[0].weights.data())
            .map(|(w, g)| w - 0.25 * g)
            .collect();
        opt.step(&mut p, &g).unwrap();
        assert_eq!(p.layers[0].weights.data(), &expect[..]);
    }

    #[test]
    fn non_finite_gradients_are_named() {
        let mut opt = OptimizerState::new(OptimizerConfig::default()).unwrap();
        let mut p = random_params(6);
        let mut g = p.zeros_like();
        g.layers[0].bias.data_mut()[2] = f64::NAN;
        match opt.step(&mut p, &g) {
            Err(Error::NonFinite(name)) => assert_eq!(name, "layers.0.bias"),
            other => panic!("{other:?}"),
        }
        assert_eq!(opt.steps(), 0);
        assert!(OptimizerState::<f64>::new(OptimizerConfig::new(Algorithm::Adam, -1.0)).is_err());
    }
}
