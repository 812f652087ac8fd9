//! Differentiable engine for three binary classifiers — a fully connected
//! net, a 1-D convolutional net and a stacked LSTM — written directly
//! against `ndarray` with no autograd. Each architecture implements its own
//! forward pass and hand-derived backward pass; training couples them to
//! mini-batch Adam with binary cross-entropy, optional L1-L2 penalties on
//! the weights, and inverted dropout where the architecture calls for it.
//!
//! Everything is 64-bit and deterministic: parameter init, mini-batch
//! shuffling and dropout masks all derive from explicit seeds, so a
//! (spec, data, config, seed) tuple fully determines the trained model.
//! Gradient implementations are validated against central finite
//! differences (see [`gradient_check`]).

pub mod cnn;
pub mod dnn;
pub mod lstm;
pub mod model;
pub mod serialize;
pub mod spec;
pub mod train;

pub use model::{Gradients, Model, TensorView, TensorViewMut};
pub use serialize::{load_model, save_model};
pub use spec::{
    AdamParams, CnnSpec, ConvLayerSpec, DnnSpec, EpochStats, LstmSpec, ModelSpec, TrainConfig,
    TrainHistory,
};
pub use train::{
    accuracy, adam_step, bce_loss, evaluate, gradient_check, predict, regularization_penalty,
    train, AdamState, DataSplit,
};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },
    #[error("model container: {0}")]
    Container(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("metadata: {0}")]
    Meta(#[from] serde_json::Error),
}

/// Numerically stable logistic function, kept strictly inside (0, 1).
pub fn sigmoid(z: f64) -> f64 {
    let p = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    p.clamp(1e-12, 1.0 - 1e-12)
}

/// Inverted-dropout mask: each entry is 0 with probability `rate`, else
/// 1/(1 − rate), so the expected value of `mask ⊙ x` equals `x` and
/// inference needs no rescaling.
pub(crate) fn dropout_mask(rng: &mut ChaCha8Rng, len: usize, rate: f64) -> Vec<f64> {
    debug_assert!((0.0..1.0).contains(&rate));
    if rate == 0.0 {
        return vec![1.0; len];
    }
    let keep = 1.0 / (1.0 - rate);
    (0..len).map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep }).collect()
}

/// Mix a base seed with two stream indices into an independent-looking
/// seed (splitmix-style finalizer). Used to derive per-epoch shuffle seeds
/// and per-batch dropout seeds from one run seed.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base
        ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ index.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
