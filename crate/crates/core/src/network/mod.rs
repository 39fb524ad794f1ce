//! Layer stacks, parameters, forward/backward passes and weight files.

mod io;
pub(crate) mod model;
mod params;
mod spec;

pub use io::{decode_weights, encode_weights, load_weights, save_weights, WEIGHTS_MAGIC};
pub use model::{
    backward, backward_sample, forward, forward_sample, loss, one_hot, predict, Activations,
    ForwardPass,
};
pub use params::{LayerParams, Parameters};
pub use spec::{build_disease_cnn, build_rice_cnn, param_count, Activation, LayerSpec, NetworkSpec};

/// Conv kernels are always 3×3.
pub const KERNEL_SIZE: usize = 3;
