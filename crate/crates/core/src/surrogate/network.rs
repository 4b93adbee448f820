//! One-hidden-layer feedforward regressor with rectifier hidden units.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Weights are stored in one flat buffer so optimizers can treat them uniformly:
/// input-to-hidden `w[d * hidden + h]`, hidden biases, hidden-to-output, output bias.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateNetwork<T> {
    input_dim: usize,
    hidden_dim: usize,
    params: Vec<T>,
}

/// Gradient buffer laid out like [`SurrogateNetwork::params`].
pub type Gradient<T> = Vec<T>;

impl<T: Real> SurrogateNetwork<T> {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        let len = Self::param_count(input_dim, hidden_dim);
        Self { input_dim, hidden_dim, params: vec![T::zero(); len] }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng + ?Sized>(input_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        let mut net = Self::zeros(input_dim, hidden_dim);
        let limit_in = (6.0 / (input_dim + hidden_dim) as f64).sqrt();
        let limit_out = (6.0 / (hidden_dim + 1) as f64).sqrt();
        let w_end = input_dim * hidden_dim;
        for p in &mut net.params[..w_end] {
            *p = T::lit(rng.random_range(-limit_in..limit_in));
        }
        let v_start = w_end + hidden_dim;
        for p in &mut net.params[v_start..v_start + hidden_dim] {
            *p = T::lit(rng.random_range(-limit_out..limit_out));
        }
        net
    }

    pub fn from_parts(input_dim: usize, hidden_dim: usize, w: &[T], hidden_bias: &[T], v: &[T], output_bias: T) -> Result<Self> {
        if w.len() != input_dim * hidden_dim || hidden_bias.len() != hidden_dim || v.len() != hidden_dim {
            return Err(Error::DimensionMismatch("network part sizes".into()));
        }
        let mut params = Vec::with_capacity(Self::param_count(input_dim, hidden_dim));
        params.extend_from_slice(w);
        params.extend_from_slice(hidden_bias);
        params.extend_from_slice(v);
        params.push(output_bias);
        Ok(Self { input_dim, hidden_dim, params })
    }

    pub fn from_flat(input_dim: usize, hidden_dim: usize, params: Vec<T>) -> Result<Self> {
        if params.len() != Self::param_count(input_dim, hidden_dim) {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for a {input_dim}-{hidden_dim}-1 network",
                params.len()
            )));
        }
        Ok(Self { input_dim, hidden_dim, params })
    }

    pub fn param_count(input_dim: usize, hidden_dim: usize) -> usize {
        input_dim * hidden_dim + 2 * hidden_dim + 1
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let b = self.input_dim * self.hidden_dim;
        let v = b + self.hidden_dim;
        let o = v + self.hidden_dim;
        (b, v, o)
    }

    /// Fills `hidden` with the pre-activations and returns the output.
    fn forward_into(&self, x: &[T], hidden: &mut [T]) -> T {
        let (b_off, v_off, o_off) = self.offsets();
        let h = self.hidden_dim;
        hidden.copy_from_slice(&self.params[b_off..v_off]);
        for (d, &xd) in x.iter().enumerate() {
            let row = &self.params[d * h..(d + 1) * h];
            for (acc, &w) in hidden.iter_mut().zip(row) {
                *acc += xd * w;
            }
        }
        let mut out = self.params[o_off];
        for (k, &pre) in hidden.iter().enumerate() {
            if pre > T::zero() {
                out += pre * self.params[v_off + k];
            }
        }
        out
    }

    /// Identity output on top of rectified hidden units.
    pub fn forward(&self, x: &[T]) -> Result<T> {
        self.check_input(x)?;
        let mut hidden = vec![T::zero(); self.hidden_dim];
        Ok(self.forward_into(x, &mut hidden))
    }

    fn check_input(&self, x: &[T]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch(format!("input of length {} for {} inputs", x.len(), self.input_dim)));
        }
        Ok(())
    }

    /// Mean squared error over `(inputs, targets)`.
    pub fn mse(&self, inputs: &[Vec<T>], targets: &[T]) -> Result<T> {
        if inputs.len() != targets.len() || inputs.is_empty() {
            return Err(Error::DimensionMismatch("batch inputs and targets".into()));
        }
        let mut hidden = vec![T::zero(); self.hidden_dim];
        let mut sum = T::zero();
        for (x, &y) in inputs.iter().zip(targets) {
            self.check_input(x)?;
            let e = self.forward_into(x, &mut hidden) - y;
            sum += e * e;
        }
        Ok(sum / T::lit(inputs.len() as f64))
    }

    /// Gradient of `(1/B) * sum (f(x) - y)^2` by backpropagation.
    /// The rectifier's subgradient at zero is taken as zero.
    pub fn gradient(&self, inputs: &[&[T]], targets: &[T]) -> Result<Gradient<T>> {
        if inputs.len() != targets.len() || inputs.is_empty() {
            return Err(Error::DimensionMismatch("batch inputs and targets".into()));
        }
        let (b_off, v_off, o_off) = self.offsets();
        let h = self.hidden_dim;
        let mut grad = vec![T::zero(); self.params.len()];
        let mut hidden = vec![T::zero(); h];
        let scale = T::lit(2.0 / inputs.len() as f64);
        for (x, &y) in inputs.iter().zip(targets) {
            self.check_input(x)?;
            let err = (self.forward_into(x, &mut hidden) - y) * scale;
            grad[o_off] += err;
            for k in 0..h {
                let pre = hidden[k];
                if pre > T::zero() {
                    grad[v_off + k] += err * pre;
                    let delta = err * self.params[v_off + k];
                    grad[b_off + k] += delta;
                    for (d, &xd) in x.iter().enumerate() {
                        grad[d * h + k] += delta * xd;
                    }
                }
            }
        }
        Ok(grad)
    }
}
