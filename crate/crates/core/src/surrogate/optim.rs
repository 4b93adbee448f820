//! First-order optimizers over a flat parameter buffer.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

/// Moment estimates and hyper-parameters for Adam.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState<T> {
    pub m: Vec<T>,
    pub v: Vec<T>,
    pub t: u64,
    pub beta1: T,
    pub beta2: T,
    pub alpha: T,
    pub epsilon: T,
}

impl<T: Real> AdamState<T> {
    pub fn new(len: usize, alpha: T) -> Self {
        Self {
            m: vec![T::zero(); len],
            v: vec![T::zero(); len],
            t: 0,
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            alpha,
            epsilon: T::lit(1e-8),
        }
    }

    pub fn with_defaults(len: usize) -> Self {
        Self::new(len, T::lit(1e-3))
    }

    pub fn reset(&mut self) {
        self.m.iter_mut().for_each(|x| *x = T::zero());
        self.v.iter_mut().for_each(|x| *x = T::zero());
        self.t = 0;
    }
}

/// One Adam update with bias-corrected first and second moments.
pub fn adam_step<T: Real>(params: &mut [T], grads: &[T], state: &mut AdamState<T>) {
    debug_assert_eq!(params.len(), grads.len());
    debug_assert_eq!(params.len(), state.m.len());
    state.t += 1;
    let t = state.t as i32;
    let (b1, b2) = (state.beta1, state.beta2);
    let c1 = T::one() - b1.powi(t);
    let c2 = T::one() - b2.powi(t);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = b1 * state.m[i] + (T::one() - b1) * g;
        state.v[i] = b2 * state.v[i] + (T::one() - b2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params[i] -= state.alpha * m_hat / (v_hat.sqrt() + state.epsilon);
    }
}

/// Plain gradient descent with a single learning rate.
pub fn sgd_step<T: Real>(params: &mut [T], grads: &[T], rate: T) {
    for (p, &g) in params.iter_mut().zip(grads) {
        *p -= rate * g;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn first_adam_step_moves_by_alpha_against_gradient() {
        let mut p = vec![1.0, -2.0, 0.5];
        let g = vec![0.3, -4.0, 1e-3];
        let mut s = AdamState::with_defaults(3);
        adam_step(&mut p, &g, &mut s);
        assert_eq!(s.t, 1);
        assert_relative_eq!(p[0], 1.0 - 1e-3, epsilon = 1e-9);
        assert_relative_eq!(p[1], -2.0 + 1e-3, epsilon = 1e-9);
        assert_relative_eq!(p[2], 0.5 - 1e-3, epsilon = 1e-7);
    }

    #[test]
    fn adam_defaults() {
        let s = AdamState::<f64>::with_defaults(1);
        assert_eq!((s.beta1, s.beta2, s.epsilon, s.alpha), (0.9, 0.999, 1e-8, 1e-3));
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let mut p = vec![0.25f32, 3.0];
        let mut s = AdamState::with_defaults(2);
        for _ in 0..100 {
            adam_step(&mut p, &[0.0, 0.0], &mut s);
        }
        assert_eq!(p, vec![0.25, 3.0]);
    }

    #[test]
    fn sgd_update() {
        let mut p = vec![1.0];
        sgd_step(&mut p, &[2.0], 0.1);
        assert_relative_eq!(p[0], 0.8, epsilon = 1e-15);
        sgd_step(&mut p, &[2.0], 0.0);
        assert_relative_eq!(p[0], 0.8, epsilon = 1e-15);
    }

    #[test]
    fn sgd_and_adam_agree_in_sign_on_first_step() {
        let g = [0.7f64, -0.2, 5.0, -1e-4];
        let mut a = vec![0.0f64; 4];
        let mut b = vec![0.0; 4];
        adam_step(&mut a, &g, &mut AdamState::with_defaults(4));
        sgd_step(&mut b, &g, 0.01);
        for i in 0..4 {
            assert_eq!(a[i].signum(), b[i].signum());
        }
    }
}
