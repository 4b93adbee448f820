//! Random-walk and adaptive random-walk proposals on a box-shaped uniform prior.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Log prior density assigned outside the prior box.
pub const OUT_OF_PRIOR: f64 = -1.0e10;

/// Closed interval `[lower_j, upper_j]` per parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl PriorBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch(format!("{} lower vs {} upper bounds", lower.len(), upper.len())));
        }
        if let Some(j) = (0..lower.len()).find(|&j| !(lower[j] < upper[j]) || !lower[j].is_finite() || !upper[j].is_finite()) {
            return Err(Error::InvalidConfig(format!("prior bound {j} is empty: [{}, {}]", lower[j], upper[j])));
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn interval(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    pub fn width(&self, j: usize) -> f64 {
        self.upper[j] - self.lower[j]
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim() && theta.iter().enumerate().all(|(j, &x)| self.lower[j] <= x && x <= self.upper[j])
    }

    /// Maps each component linearly so the box becomes the unit cube.
    pub fn normalize(&self, theta: &[f64]) -> Vec<f64> {
        theta.iter().enumerate().map(|(j, &x)| (x - self.lower[j]) / self.width(j)).collect()
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.dim()).map(|j| self.lower[j] + self.width(j) * rng.random::<f64>()).collect()
    }

    /// Mirrors every component back into its interval.
    pub fn reflect(&self, theta: &mut [f64]) {
        for (j, x) in theta.iter_mut().enumerate() {
            *x = reflect_into(*x, self.lower[j], self.upper[j]);
        }
    }
}

fn reflect_into(x: f64, lo: f64, hi: f64) -> f64 {
    if (lo..=hi).contains(&x) || !x.is_finite() {
        return x;
    }
    let w = hi - lo;
    let y = (x - lo).rem_euclid(2.0 * w);
    if y > w {
        lo + (2.0 * w - y)
    } else {
        lo + y
    }
}

pub fn log_prior(theta: &[f64], bounds: &PriorBounds) -> f64 {
    if bounds.contains(theta) {
        0.0
    } else {
        OUT_OF_PRIOR
    }
}

/// Gaussian step with per-parameter standard deviation `phi * (upper - lower)`.
pub fn propose_rw<R: Rng + ?Sized>(theta: &[f64], bounds: &PriorBounds, phi: f64, rng: &mut R) -> Vec<f64> {
    let mut out: Vec<f64> = theta
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let z: f64 = rng.sample(StandardNormal);
            x + z * bounds.width(j) * phi
        })
        .collect();
    bounds.reflect(&mut out);
    out
}

/// Accepted chain iterates of a single replica.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ChainHistory {
    entries: Vec<Vec<f64>>,
}

impl ChainHistory {
    pub fn push(&mut self, theta: &[f64]) {
        self.entries.push(theta.to_vec());
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }
}

impl From<Vec<Vec<f64>>> for ChainHistory {
    fn from(entries: Vec<Vec<f64>>) -> Self {
        Self { entries }
    }
}

/// Sample covariance of the history plus `diag(min_steps^2)`.
pub fn update_covariance(history: &ChainHistory, min_steps: &[f64]) -> Result<DMatrix<f64>> {
    let n = history.len();
    if n < 2 {
        return Err(Error::InsufficientHistory(n));
    }
    let p = min_steps.len();
    if history.entries.iter().any(|e| e.len() != p) {
        return Err(Error::DimensionMismatch("history entries do not match the floor dimension".into()));
    }
    let mut mean = vec![0.0; p];
    for e in &history.entries {
        for (m, x) in mean.iter_mut().zip(e) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = DMatrix::zeros(p, p);
    for e in &history.entries {
        for a in 0..p {
            let da = e[a] - mean[a];
            for b in a..p {
                cov[(a, b)] += da * (e[b] - mean[b]);
            }
        }
    }
    for a in 0..p {
        for b in a..p {
            let v = cov[(a, b)] / (n - 1) as f64;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
        cov[(a, a)] += min_steps[a] * min_steps[a];
    }
    Ok(cov)
}

/// Lower-triangular factor of a proposal covariance.
#[derive(Clone, Debug, PartialEq)]
pub struct ProposalFactor {
    lower: DMatrix<f64>,
}

impl ProposalFactor {
    pub fn new(cov: &DMatrix<f64>) -> Result<Self> {
        if !cov.is_square() || cov.iter().any(|v| !v.is_finite()) {
            return Err(Error::FactorizationFailure);
        }
        let chol = cov.clone().cholesky().ok_or(Error::FactorizationFailure)?;
        Ok(Self { lower: chol.l() })
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    pub fn propose<R: Rng + ?Sized>(&self, theta: &[f64], bounds: &PriorBounds, rng: &mut R) -> Vec<f64> {
        let p = self.dim();
        let z: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
        let mut out = theta.to_vec();
        for a in 0..p {
            for b in 0..=a {
                out[a] += self.lower[(a, b)] * z[b];
            }
        }
        bounds.reflect(&mut out);
        out
    }
}

/// Multivariate normal step with covariance `cov`, reflected into the prior box.
pub fn propose_arw<R: Rng + ?Sized>(theta: &[f64], cov: &DMatrix<f64>, bounds: &PriorBounds, rng: &mut R) -> Result<Vec<f64>> {
    Ok(ProposalFactor::new(cov)?.propose(theta, bounds, rng))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProposalKind {
    Rw,
    Arw,
}

impl std::str::FromStr for ProposalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rw" => Ok(ProposalKind::Rw),
            "arw" => Ok(ProposalKind::Arw),
            other => Err(Error::InvalidConfig(format!("unknown proposal `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RwConfig {
    pub phi: f64,
}

impl Default for RwConfig {
    fn default() -> Self {
        Self { phi: 0.05 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArwConfig {
    /// Samples between covariance updates.
    pub adapt_interval: usize,
    /// Per-parameter floor on the step size, as a fraction of the prior width.
    pub min_step_fraction: f64,
    /// Random-walk samples before the first adaptation.
    pub warmup: usize,
}

impl Default for ArwConfig {
    fn default() -> Self {
        Self { adapt_interval: 25, min_step_fraction: 0.01, warmup: 100 }
    }
}

/// Per-replica proposal generator; owns the chain history for adaptation.
#[derive(Clone, Debug)]
pub struct Proposer {
    kind: ProposalKind,
    rw: RwConfig,
    arw: ArwConfig,
    min_steps: Vec<f64>,
    history: ChainHistory,
    factor: Option<ProposalFactor>,
}

impl Proposer {
    pub fn new(kind: ProposalKind, rw: RwConfig, arw: ArwConfig, bounds: &PriorBounds) -> Self {
        let min_steps = (0..bounds.dim()).map(|j| arw.min_step_fraction * bounds.width(j)).collect();
        Self { kind, rw, arw, min_steps, history: ChainHistory::default(), factor: None }
    }

    pub fn is_adapted(&self) -> bool {
        self.factor.is_some()
    }

    pub fn history(&self) -> &ChainHistory {
        &self.history
    }

    pub fn propose<R: Rng + ?Sized>(&self, theta: &[f64], bounds: &PriorBounds, rng: &mut R) -> Vec<f64> {
        match &self.factor {
            Some(f) => f.propose(theta, bounds, rng),
            None => propose_rw(theta, bounds, self.rw.phi, rng),
        }
    }

    /// Appends the chain state after a sample; refreshes the covariance on schedule.
    pub fn record(&mut self, theta: &[f64]) {
        self.history.push(theta);
        if self.kind != ProposalKind::Arw {
            return;
        }
        let n = self.history.len();
        let interval = self.arw.adapt_interval.max(1);
        if n >= self.arw.warmup.max(2) && (n - self.arw.warmup.max(2)) % interval == 0 {
            // A failed factorization keeps the previous kernel (or the RW fallback).
            if let Ok(f) = update_covariance(&self.history, &self.min_steps).and_then(|c| ProposalFactor::new(&c)) {
                self.factor = Some(f);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rainfall_box() -> PriorBounds {
        PriorBounds::new(vec![0.0, 3e-6], vec![3.0, 7e-6]).unwrap()
    }

    #[test]
    fn rw_step_size_is_fraction_of_width() {
        let b = rainfall_box();
        assert_relative_eq!(b.width(0) * 0.05, 0.15, epsilon = 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let draws: Vec<f64> = (0..20_000).map(|_| propose_rw(&[1.5, 5e-6], &b, 0.05, &mut rng)[0] - 1.5).collect();
        let sd = (draws.iter().map(|d| d * d).sum::<f64>() / draws.len() as f64).sqrt();
        assert!((sd - 0.15).abs() / 0.15 < 0.03, "sd = {sd}");
    }

    #[test]
    fn zero_phi_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert_eq!(propose_rw(&[1.0, 4e-6], &rainfall_box(), 0.0, &mut rng), vec![1.0, 4e-6]);
    }

    #[test]
    fn reflection() {
        assert_relative_eq!(reflect_into(3.1, 0.0, 3.0), 2.9, epsilon = 1e-12);
        assert_relative_eq!(reflect_into(-0.5, 0.0, 3.0), 0.5, epsilon = 1e-12);
        assert_relative_eq!(reflect_into(7.5, 0.0, 3.0), 1.5, epsilon = 1e-12);
        assert_eq!(reflect_into(3.0, 0.0, 3.0), 3.0);
    }

    #[test]
    fn prior_is_closed_box() {
        let b = rainfall_box();
        assert_eq!(log_prior(&b.center(), &b), 0.0);
        assert_eq!(log_prior(&[3.0, 3e-6], &b), 0.0);
        assert_eq!(log_prior(&[-0.1, 5e-6], &b), OUT_OF_PRIOR);
        assert!(PriorBounds::new(vec![1.0], vec![1.0]).is_err());
    }

    #[test]
    fn covariance_of_identical_points_is_floor() {
        let h = ChainHistory::from(vec![vec![1.0, 2.0]; 5]);
        let cov = update_covariance(&h, &[0.1, 0.2]).unwrap();
        assert_relative_eq!(cov[(0, 0)], 0.01, epsilon = 1e-15);
        assert_relative_eq!(cov[(1, 1)], 0.04, epsilon = 1e-15);
        assert_eq!(cov[(0, 1)], 0.0);
    }

    #[test]
    fn covariance_of_two_points() {
        let h = ChainHistory::from(vec![vec![0.0, 0.0], vec![1.0, 1.0]]);
        let cov = update_covariance(&h, &[0.01, 0.01]).unwrap();
        assert_relative_eq!(cov[(0, 1)], 0.5, epsilon = 1e-15);
        assert_relative_eq!(cov[(1, 0)], 0.5, epsilon = 1e-15);
        assert_relative_eq!(cov[(0, 0)], 0.5001, epsilon = 1e-15);
        assert_relative_eq!(cov[(1, 1)], 0.5001, epsilon = 1e-15);
        assert!(matches!(update_covariance(&ChainHistory::from(vec![vec![0.0, 0.0]]), &[0.01, 0.01]), Err(Error::InsufficientHistory(1))));
    }

    #[test]
    fn zero_matrix_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = propose_arw(&[0.0, 0.0], &DMatrix::zeros(2, 2), &rainfall_box(), &mut rng);
        assert!(matches!(r, Err(Error::FactorizationFailure)));
    }

    fn sample_cov(draws: &[Vec<f64>]) -> DMatrix<f64> {
        update_covariance(&ChainHistory::from(draws.to_vec()), &[0.0, 0.0]).unwrap()
    }

    #[test]
    fn diagonal_covariance_gives_marginal_steps() {
        let b = PriorBounds::new(vec![-100.0, -100.0], vec![100.0, 100.0]).unwrap();
        let cov = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.04, 0.25]));
        let f = ProposalFactor::new(&cov).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let draws: Vec<Vec<f64>> = (0..20_000).map(|_| f.propose(&[0.0, 0.0], &b, &mut rng)).collect();
        let c = sample_cov(&draws);
        assert!((c[(0, 0)].sqrt() - 0.2).abs() / 0.2 < 0.05);
        assert!((c[(1, 1)].sqrt() - 0.5).abs() / 0.5 < 0.05);
    }

    #[test]
    fn correlated_covariance_is_reproduced() {
        let b = PriorBounds::new(vec![-100.0, -100.0], vec![100.0, 100.0]).unwrap();
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.6, 0.6, 0.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws: Vec<Vec<f64>> = (0..100_000).map(|_| propose_arw(&[0.0, 0.0], &cov, &b, &mut rng).unwrap()).collect();
        let c = sample_cov(&draws);
        assert!((&c - &cov).norm() / cov.norm() < 0.10);
    }

    #[test]
    fn arw_adapts_after_warmup() {
        let b = rainfall_box();
        let arw = ArwConfig { adapt_interval: 5, min_step_fraction: 0.01, warmup: 10 };
        let mut p = Proposer::new(ProposalKind::Arw, RwConfig::default(), arw, &b);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut theta = b.center();
        for i in 0..9 {
            theta = p.propose(&theta, &b, &mut rng);
            p.record(&theta);
            assert!(!p.is_adapted(), "adapted at {i}");
        }
        p.record(&theta);
        assert!(p.is_adapted());

        let mut rw = Proposer::new(ProposalKind::Rw, RwConfig::default(), arw, &b);
        for _ in 0..50 {
            rw.record(&theta);
        }
        assert!(!rw.is_adapted());
    }

    proptest! {
        #[test]
        fn proposals_stay_in_box(x in -10.0f64..10.0, y in -10.0f64..10.0, phi in 0.0f64..5.0, seed in any::<u64>()) {
            let b = PriorBounds::new(vec![-1.0, 0.5], vec![2.0, 0.75]).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut start = vec![x, y];
            b.reflect(&mut start);
            prop_assert!(b.contains(&start));
            let p = propose_rw(&start, &b, phi, &mut rng);
            prop_assert!(b.contains(&p));
            let cov = DMatrix::from_row_slice(2, 2, &[4.0, 0.1, 0.1, 1.0]);
            prop_assert!(b.contains(&propose_arw(&start, &cov, &b, &mut rng).unwrap()));
        }

        #[test]
        fn covariance_is_spd(points in proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 3), 2..30)) {
            let cov = update_covariance(&ChainHistory::from(points), &[0.01, 0.02, 0.03]).unwrap();
            prop_assert!(ProposalFactor::new(&cov).is_ok());
            prop_assert!((&cov - cov.transpose()).norm() == 0.0);
        }
    }
}
