//! Dense sigmoid network with explicit forward cache and backprop.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::rng::Rng;
use crate::{Error, Result};

/// Numerically stable logistic function.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
#[inline]
pub fn softplus(z: f64) -> f64 {
    z.max(0.0) + libm::log1p(libm::exp(-z.abs()))
}

/// Fully connected network; every layer (output included) applies a
/// sigmoid. `weights[l]` is row-major `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

/// Per-layer activations of one forward pass; `acts[0]` is the input and
/// `pre[l]` the pre-activation of layer `l`.
#[derive(Debug, Clone)]
pub struct Cache {
    pub acts: Vec<Vec<f64>>,
    pub pre: Vec<Vec<f64>>,
}

impl Cache {
    pub fn output(&self) -> &[f64] {
        self.acts.last().unwrap()
    }

    pub fn logits(&self) -> &[f64] {
        self.pre.last().unwrap()
    }
}

/// Gradient (or any parameter-shaped buffer) for an [`Mlp`].
#[derive(Debug, Clone, PartialEq)]
pub struct Grads {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Grads {
    pub fn zeros_like(mlp: &Mlp) -> Self {
        Self {
            weights: mlp.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: mlp.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Grads) {
        for (a, b) in self.iter_mut().zip(other.iter()) {
            *a += b;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights
            .iter()
            .chain(&self.biases)
            .flat_map(|v| v.iter().copied())
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights
            .iter_mut()
            .chain(self.biases.iter_mut())
            .flat_map(|v| v.iter_mut())
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(f64::is_finite)
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Mlp {
    fn check_sizes(sizes: &[usize]) -> Result<()> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidConfig {
                field: "layers",
                detail: alloc::format!("need at least two non-empty layers, got {sizes:?}"),
            });
        }
        Ok(())
    }

    /// All-zero parameters.
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        Self::check_sizes(sizes)?;
        Ok(Self {
            sizes: sizes.to_vec(),
            weights: sizes.windows(2).map(|w| vec![0.0; w[0] * w[1]]).collect(),
            biases: sizes[1..].iter().map(|&n| vec![0.0; n]).collect(),
        })
    }

    /// Uniform `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` for weights and biases.
    pub fn init(sizes: &[usize], rng: &mut Rng) -> Result<Self> {
        let mut m = Self::zeros(sizes)?;
        for l in 0..m.weights.len() {
            let bound = 1.0 / libm::sqrt(m.sizes[l] as f64);
            for w in m.weights[l].iter_mut().chain(m.biases[l].iter_mut()) {
                *w = rng.gen_range(-bound..=bound);
            }
        }
        Ok(m)
    }

    pub fn from_parts(
        sizes: Vec<usize>,
        weights: Vec<Vec<f64>>,
        biases: Vec<Vec<f64>>,
    ) -> Result<Self> {
        Self::check_sizes(&sizes)?;
        let layers = sizes.len() - 1;
        if weights.len() != layers || biases.len() != layers {
            return Err(Error::DimensionMismatch {
                expected: layers,
                actual: weights.len().min(biases.len()),
            });
        }
        for l in 0..layers {
            if weights[l].len() != sizes[l] * sizes[l + 1] {
                return Err(Error::DimensionMismatch {
                    expected: sizes[l] * sizes[l + 1],
                    actual: weights[l].len(),
                });
            }
            if biases[l].len() != sizes[l + 1] {
                return Err(Error::DimensionMismatch {
                    expected: sizes[l + 1],
                    actual: biases[l].len(),
                });
            }
        }
        let m = Self {
            sizes,
            weights,
            biases,
        };
        m.check_finite()?;
        Ok(m)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    /// Mutable view of every parameter in the same order as [`Grads::iter`].
    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights
            .iter_mut()
            .chain(self.biases.iter_mut())
            .flat_map(|v| v.iter_mut())
    }

    pub fn params(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights
            .iter()
            .chain(&self.biases)
            .flat_map(|v| v.iter().copied())
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.params().all(f64::is_finite) {
            Ok(())
        } else {
            Err(Error::NonFinite("network parameters"))
        }
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: input.len(),
            });
        }
        if !input.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("network input"));
        }
        Ok(())
    }

    pub fn forward_cached(&self, input: &[f64]) -> Result<Cache> {
        self.check_input(input)?;
        let mut acts = Vec::with_capacity(self.sizes.len());
        let mut pre = Vec::with_capacity(self.sizes.len() - 1);
        acts.push(input.to_vec());
        for l in 0..self.weights.len() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let x = &acts[l];
            let w = &self.weights[l];
            let z: Vec<f64> = (0..n_out)
                .map(|o| {
                    let row = &w[o * n_in..(o + 1) * n_in];
                    row.iter()
                        .zip(x)
                        .fold(self.biases[l][o], |s, (a, b)| s + a * b)
                })
                .collect();
            acts.push(z.iter().map(|&v| sigmoid(v)).collect());
            pre.push(z);
        }
        Ok(Cache { acts, pre })
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_cached(input)?.acts.pop().unwrap())
    }

    /// Backprop seeded with the gradient w.r.t. the network *output*.
    pub fn backward(&self, cache: &Cache, d_output: &[f64]) -> Result<(Grads, Vec<f64>)> {
        if d_output.len() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.output_dim(),
                actual: d_output.len(),
            });
        }
        let out = cache.output();
        let d_logits: Vec<f64> = d_output
            .iter()
            .zip(out)
            .map(|(g, a)| g * a * (1.0 - a))
            .collect();
        self.backward_logits(cache, &d_logits)
    }

    /// Backprop seeded with the gradient w.r.t. the last pre-activation.
    pub fn backward_logits(&self, cache: &Cache, d_logits: &[f64]) -> Result<(Grads, Vec<f64>)> {
        let layers = self.weights.len();
        if cache.acts.len() != layers + 1 || cache.acts[0].len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: cache.acts[0].len(),
            });
        }
        if d_logits.len() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.output_dim(),
                actual: d_logits.len(),
            });
        }
        let mut grads = Grads::zeros_like(self);
        let mut delta = d_logits.to_vec();
        for l in (0..layers).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let x = &cache.acts[l];
            for (o, &d) in delta.iter().enumerate().take(n_out) {
                grads.biases[l][o] = d;
                let row = &mut grads.weights[l][o * n_in..(o + 1) * n_in];
                for (g, xi) in row.iter_mut().zip(x) {
                    *g = d * xi;
                }
            }
            let w = &self.weights[l];
            let mut d_in = vec![0.0; n_in];
            for o in 0..n_out {
                for i in 0..n_in {
                    d_in[i] += w[o * n_in + i] * delta[o];
                }
            }
            if l > 0 {
                for (d, a) in d_in.iter_mut().zip(x) {
                    *d *= a * (1.0 - a);
                }
            }
            delta = d_in;
        }
        Ok((grads, delta))
    }
}

/// Classical momentum: `v ← μ·v + g`, `θ ← θ − lr·v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Momentum {
    velocity: Grads,
}

impl Momentum {
    pub fn new(mlp: &Mlp) -> Self {
        Self {
            velocity: Grads::zeros_like(mlp),
        }
    }

    pub fn velocity(&self) -> &Grads {
        &self.velocity
    }

    pub fn step(&mut self, mlp: &mut Mlp, grads: &Grads, lr: f64, momentum: f64) -> Result<()> {
        if !(lr.is_finite() && lr >= 0.0) {
            return Err(Error::InvalidConfig {
                field: "lr",
                detail: alloc::format!("{lr}"),
            });
        }
        if !(0.0..1.0).contains(&momentum) {
            return Err(Error::InvalidConfig {
                field: "momentum",
                detail: alloc::format!("{momentum}"),
            });
        }
        if !grads.is_finite() {
            return Err(Error::NonFinite("gradients"));
        }
        for (v, g) in self.velocity.iter_mut().zip(grads.iter()) {
            *v = momentum * *v + g;
        }
        for (p, v) in mlp.params_mut().zip(self.velocity.iter()) {
            *p -= lr * v;
        }
        mlp.check_finite()
    }
}

/// One stateless step; equivalent to a fresh [`Momentum`].
pub fn sgd_step(
    mlp: &mut Mlp,
    grads: &Grads,
    velocity: &mut Momentum,
    lr: f64,
    momentum: f64,
) -> Result<()> {
    velocity.step(mlp, grads, lr, momentum)
}
