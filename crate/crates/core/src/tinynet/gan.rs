//! Generator/discriminator pair and the adversarial losses.
//!
//! The discriminator scores `(features, cost)` where `cost = G(features)`.
//! Demo nodes form the real class, planned nodes the fake class. The
//! generator only influences the discriminator through the cost input.

use serde::{Deserialize, Serialize};

use super::mlp::{sigmoid, softplus, Grads, Mlp, Momentum};
use crate::features::{FeatureVector, FEATURE_DIM};
use crate::rng::stream;
use crate::{Error, Result};

pub const GENERATOR_LAYERS: [usize; 3] = [FEATURE_DIM, 10, 1];
pub const DISCRIMINATOR_LAYERS: [usize; 3] = [FEATURE_DIM + 1, 10, 1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorObjective {
    /// Minimize `-log D(f, G(f))`.
    #[default]
    NonSaturating,
    /// Minimize `log(1 - D(f, G(f)))`.
    Literal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GanPair {
    pub generator: Mlp,
    pub discriminator: Mlp,
    g_opt: Momentum,
    d_opt: Momentum,
    pub seed: u64,
}

impl GanPair {
    pub fn new(seed: u64) -> Self {
        let generator = Mlp::init(&GENERATOR_LAYERS, &mut stream(seed, &[0x6e])).unwrap();
        let discriminator = Mlp::init(&DISCRIMINATOR_LAYERS, &mut stream(seed, &[0xd1])).unwrap();
        Self::from_nets(generator, discriminator, seed).unwrap()
    }

    /// Zero weights everywhere: `G ≡ 0.5`, `D ≡ 0.5`.
    pub fn zeros() -> Self {
        Self::from_nets(
            Mlp::zeros(&GENERATOR_LAYERS).unwrap(),
            Mlp::zeros(&DISCRIMINATOR_LAYERS).unwrap(),
            0,
        )
        .unwrap()
    }

    pub fn from_nets(generator: Mlp, discriminator: Mlp, seed: u64) -> Result<Self> {
        if generator.input_dim() != FEATURE_DIM || generator.output_dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: FEATURE_DIM,
                actual: generator.input_dim(),
            });
        }
        if discriminator.input_dim() != FEATURE_DIM + 1 || discriminator.output_dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: FEATURE_DIM + 1,
                actual: discriminator.input_dim(),
            });
        }
        Ok(Self {
            g_opt: Momentum::new(&generator),
            d_opt: Momentum::new(&discriminator),
            generator,
            discriminator,
            seed,
        })
    }

    /// Node cost `c = G(f)` in `(0, 1)`.
    pub fn cost(&self, f: &FeatureVector) -> f64 {
        self.generator
            .forward(&f.to_array())
            .map(|v| v[0])
            .unwrap_or(f64::NAN)
    }

    /// Real-data probability `D(f, c)`.
    pub fn score(&self, f: &FeatureVector, c: f64) -> f64 {
        let mut x = [0.0; FEATURE_DIM + 1];
        x[..FEATURE_DIM].copy_from_slice(&f.to_array());
        x[FEATURE_DIM] = c;
        self.discriminator
            .forward(&x)
            .map(|v| v[0])
            .unwrap_or(f64::NAN)
    }

    fn d_input(&self, f: &FeatureVector) -> Result<[f64; FEATURE_DIM + 1]> {
        let mut x = [0.0; FEATURE_DIM + 1];
        x[..FEATURE_DIM].copy_from_slice(&f.to_array());
        x[FEATURE_DIM] = self.generator.forward(&f.to_array())?[0];
        Ok(x)
    }

    pub fn d_loss(&self, real: &[FeatureVector], fake: &[FeatureVector]) -> Result<f64> {
        self.d_loss_grad(real, fake).map(|(l, _)| l)
    }

    /// Balanced binary cross-entropy `½(mean_real −log D + mean_fake −log(1−D))`
    /// and its gradient w.r.t. the discriminator. `G` is held constant.
    pub fn d_loss_grad(
        &self,
        real: &[FeatureVector],
        fake: &[FeatureVector],
    ) -> Result<(f64, Grads)> {
        if real.is_empty() || fake.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let mut grads = Grads::zeros_like(&self.discriminator);
        let mut loss = 0.0;
        for (batch, is_real) in [(real, true), (fake, false)] {
            let w = 0.5 / batch.len() as f64;
            for f in batch {
                let cache = self.discriminator.forward_cached(&self.d_input(f)?)?;
                let z = cache.logits()[0];
                let (l, dz) = if is_real {
                    (softplus(-z), sigmoid(z) - 1.0)
                } else {
                    (softplus(z), sigmoid(z))
                };
                loss += w * l;
                let (g, _) = self.discriminator.backward_logits(&cache, &[w * dz])?;
                grads.add_assign(&g);
            }
        }
        Ok((loss, grads))
    }

    pub fn g_loss(&self, fake: &[FeatureVector], objective: GeneratorObjective) -> Result<f64> {
        self.g_loss_grad(fake, objective).map(|(l, _)| l)
    }

    /// Generator loss on planned nodes and its gradient w.r.t. `G`, flowing
    /// through the cost coordinate of the discriminator input.
    pub fn g_loss_grad(
        &self,
        fake: &[FeatureVector],
        objective: GeneratorObjective,
    ) -> Result<(f64, Grads)> {
        if fake.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let w = 1.0 / fake.len() as f64;
        let mut grads = Grads::zeros_like(&self.generator);
        let mut loss = 0.0;
        for f in fake {
            let g_cache = self.generator.forward_cached(&f.to_array())?;
            let mut x = [0.0; FEATURE_DIM + 1];
            x[..FEATURE_DIM].copy_from_slice(&f.to_array());
            x[FEATURE_DIM] = g_cache.output()[0];
            let d_cache = self.discriminator.forward_cached(&x)?;
            let z = d_cache.logits()[0];
            let (l, dz) = match objective {
                GeneratorObjective::NonSaturating => (softplus(-z), sigmoid(z) - 1.0),
                GeneratorObjective::Literal => (-softplus(z), -sigmoid(z)),
            };
            loss += w * l;
            let (_, d_x) = self.discriminator.backward_logits(&d_cache, &[w * dz])?;
            let (g, _) = self.generator.backward(&g_cache, &[d_x[FEATURE_DIM]])?;
            grads.add_assign(&g);
        }
        Ok((loss, grads))
    }

    pub fn step_discriminator(&mut self, grads: &Grads, lr: f64, momentum: f64) -> Result<()> {
        self.d_opt
            .step(&mut self.discriminator, grads, lr, momentum)
    }

    pub fn step_generator(&mut self, grads: &Grads, lr: f64, momentum: f64) -> Result<()> {
        self.g_opt.step(&mut self.generator, grads, lr, momentum)
    }

    /// Drops optimizer state (momentum buffers).
    pub fn reset_optimizers(&mut self) {
        self.g_opt = Momentum::new(&self.generator);
        self.d_opt = Momentum::new(&self.discriminator);
    }

    pub fn params_equal(&self, other: &GanPair) -> bool {
        self.generator == other.generator && self.discriminator == other.discriminator
    }
}
