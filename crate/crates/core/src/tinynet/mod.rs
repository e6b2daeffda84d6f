//! Minimal dense network engine and the adversarial cost model.

mod gan;
mod mlp;

pub use gan::{GanPair, GeneratorObjective, DISCRIMINATOR_LAYERS, GENERATOR_LAYERS};
pub use mlp::{sgd_step, sigmoid, softplus, Cache, Grads, Mlp, Momentum};
