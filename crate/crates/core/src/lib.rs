//! Crop-image classification and explainability toolkit.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`] holds the dense [`Tensor`] type and the convolution, pooling,
//!   dense and activation kernels, forward and backward.
//! * [`imaging`] reads and writes binary PPM/PGM rasters and implements the
//!   preprocessing chain (grayscale, blur, Canny, Otsu segmentation, resize,
//!   normalisation, augmentation).
//! * [`network`] describes layer stacks, runs forward/backward passes and
//!   persists weights.
//! * [`optimizer`] applies SGD, Adam and Adamax updates.
//! * [`training`] covers manifests, stratified splits, the epoch loop and
//!   evaluation.
//! * [`metrics`] computes confusion matrices, per-class reports and
//!   micro-averaged ROC curves.
//! * [`explain`] produces superpixel-level LIME and KernelSHAP attributions
//!   and renders them as heatmaps.
//!
//! Numerical code is generic over [`Scalar`]; the aliases below pin the two
//! precisions used in practice.

pub mod error;
pub mod explain;
pub mod imaging;
pub mod metrics;
pub mod network;
pub mod optimizer;
pub mod rng;
pub mod scalar;
pub mod synthetic;
pub mod tensor;
pub mod training;

pub use error::{Error, Result};
pub use imaging::Image;
pub use network::{LayerSpec, NetworkSpec, Parameters};
pub use rng::Rng;
pub use scalar::Scalar;
pub use tensor::Tensor;

/// Double-precision tensor, used by oracle and gradient-check paths.
pub type Tensor64 = Tensor<f64>;
/// Single-precision tensor, used for training runs.
pub type Tensor32 = Tensor<f32>;
pub type Parameters64 = Parameters<f64>;
pub type Parameters32 = Parameters<f32>;
pub type Optimizer32 = optimizer::OptimizerState<f32>;
pub type Optimizer64 = optimizer::OptimizerState<f64>;
