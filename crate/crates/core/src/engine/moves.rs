//! Acceptance rules, the surrogate schedule and the pseudo-likelihood blend.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

/// `min(1, exp((L_new - L_old) / T))`; symmetric proposals need no correction.
pub fn acceptance_probability(l_new: f64, l_old: f64, temperature: f64) -> f64 {
    let p = ((l_new - l_old) / temperature).exp().min(1.0);
    if p.is_nan() {
        0.0
    } else {
        p
    }
}

/// Always consumes exactly one uniform draw so streams stay aligned across runs.
pub fn metropolis_accept<R: Rng + ?Sized>(l_new: f64, l_old: f64, temperature: f64, rng: &mut R) -> bool {
    let u: f64 = rng.random();
    u < acceptance_probability(l_new, l_old, temperature)
}

/// Replica-exchange probability `min(1, exp((1/T_i - 1/T_j)(L_j - L_i)))` on untempered likelihoods.
pub fn swap_probability(l_i: f64, l_j: f64, t_i: f64, t_j: f64) -> f64 {
    let beta = 1.0 / t_i - 1.0 / t_j;
    if beta == 0.0 {
        return 1.0;
    }
    let p = (beta * (l_j - l_i)).exp().min(1.0);
    if p.is_nan() {
        0.0
    } else {
        p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapDecision {
    pub probability: f64,
    pub accepted: bool,
}

pub fn swap_accept<R: Rng + ?Sized>(l_i: f64, l_j: f64, t_i: f64, t_j: f64, rng: &mut R) -> SwapDecision {
    let u: f64 = rng.random();
    let probability = swap_probability(l_i, l_j, t_i, t_j);
    SwapDecision { probability, accepted: u < probability }
}

/// First member of each neighbour pair tried at the `sync`-th swap point:
/// `(0,1),(2,3),..` on even syncs, `(1,2),(3,4),..` on odd ones.
pub fn swap_pairs(replicas: usize, sync: usize) -> impl Iterator<Item = (usize, usize)> {
    (sync % 2..replicas.saturating_sub(1)).step_by(2).map(|i| (i, i + 1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaluationChoice {
    TrueModel,
    Surrogate,
}

/// The true model until the surrogate has been trained once, then the
/// surrogate with probability `s_prob`. Consumes one draw either way.
pub fn choose_evaluation<R: Rng + ?Sized>(rng: &mut R, s_prob: f64, surrogate_ready: bool) -> EvaluationChoice {
    let u: f64 = rng.random();
    if surrogate_ready && u < s_prob {
        EvaluationChoice::Surrogate
    } else {
        EvaluationChoice::TrueModel
    }
}

/// The three most recent chain likelihoods.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodRing {
    values: VecDeque<f64>,
}

impl LikelihoodRing {
    pub const CAPACITY: usize = 3;

    pub fn push(&mut self, value: f64) {
        if self.values.len() == Self::CAPACITY {
            self.values.pop_front();
        }
        self.values.push_back(value);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied()
    }

    /// Mean of the last three values, padding a short history with its oldest entry.
    pub fn past_mean(&self) -> Option<f64> {
        let oldest = *self.values.front()?;
        let pad = (Self::CAPACITY - self.values.len()) as f64 * oldest;
        Some((self.values.iter().sum::<f64>() + pad) / Self::CAPACITY as f64)
    }
}

impl FromIterator<f64> for LikelihoodRing {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut ring = Self::default();
        for v in iter {
            ring.push(v);
        }
        ring
    }
}

/// `0.5 * L_surrogate + 0.5 * L_past`. An empty history contributes the surrogate value itself.
pub fn blend_pseudo(l_surrogate: f64, ring: &LikelihoodRing) -> f64 {
    let past = ring.past_mean().unwrap_or(l_surrogate);
    0.5 * l_surrogate + 0.5 * past
}
