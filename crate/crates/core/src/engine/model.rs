//! Expensive likelihoods the sampler can drive.

use std::time::Duration;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::diagnostics::{rmse_elev, rmse_sed};
use crate::error::{Error, Result};
use crate::lem::{simulate, Problem, SimulationOutput};
use crate::likelihood::{log_lik_combined, LikelihoodConfig, Observations, FAILED_LOG_LIKELIHOOD};
use crate::proposals::PriorBounds;

/// One true-model evaluation. Prediction errors are present only for models
/// that produce a landscape.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub log_likelihood: f64,
    pub rmse_elev: Option<f64>,
    pub rmse_sed: Option<f64>,
}

impl Evaluation {
    pub fn likelihood_only(log_likelihood: f64) -> Self {
        Self { log_likelihood, rmse_elev: None, rmse_sed: None }
    }

    pub fn failed() -> Self {
        Self::likelihood_only(FAILED_LOG_LIKELIHOOD)
    }
}

pub trait LikelihoodModel: Send + Sync {
    fn bounds(&self) -> &PriorBounds;

    fn param_labels(&self) -> Vec<String>;

    /// Never fails: a model that cannot produce a value returns the sentinel.
    fn evaluate(&self, theta: &[f64]) -> Evaluation;

    fn n_params(&self) -> usize {
        self.bounds().dim()
    }
}

/// The landscape-evolution forward model scored against a problem's ground truth.
#[derive(Clone, Debug)]
pub struct LandscapeModel {
    problem: Problem<f64>,
    likelihood: LikelihoodConfig,
    observations: Observations<f64>,
    delay: Duration,
}

impl LandscapeModel {
    pub fn new(problem: Problem<f64>) -> Result<Self> {
        problem.validate()?;
        let likelihood = LikelihoodConfig::for_problem(&problem);
        likelihood.validate()?;
        let observations = Observations::from_output(&problem.ground_truth);
        Ok(Self { problem, likelihood, observations, delay: Duration::ZERO })
    }

    /// Adds a fixed sleep to every evaluation, emulating a costlier simulator.
    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }

    pub fn problem(&self) -> &Problem<f64> {
        &self.problem
    }

    pub fn simulate(&self, theta: &[f64]) -> Result<SimulationOutput<f64>> {
        let params = self.problem.parameters_from(theta)?;
        simulate(&self.problem.initial_topography, &params, &self.problem.lem_config)
    }
}

impl LikelihoodModel for LandscapeModel {
    fn bounds(&self) -> &PriorBounds {
        &self.problem.prior_bounds
    }

    fn param_labels(&self) -> Vec<String> {
        self.problem.param_names.iter().map(|p| p.label().to_string()).collect()
    }

    fn evaluate(&self, theta: &[f64]) -> Evaluation {
        if !self.delay.is_zero() {
            std::thread::sleep(self.delay);
        }
        let Ok(output) = self.simulate(theta) else {
            return Evaluation::failed();
        };
        let Ok(ll) = log_lik_combined(&output, &self.observations, &self.likelihood) else {
            return Evaluation::failed();
        };
        Evaluation {
            log_likelihood: ll.value,
            rmse_elev: rmse_elev(&output.final_topography, &self.observations.elevation_truth).ok(),
            rmse_sed: rmse_sed(&output.sediment, &self.observations.sediment_truth).ok(),
        }
    }
}

/// Analytic multivariate normal log-density (up to a constant) on a box prior.
#[derive(Clone, Debug)]
pub struct GaussianModel {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    precision: DMatrix<f64>,
    bounds: PriorBounds,
}

impl GaussianModel {
    pub fn new(mean: Vec<f64>, covariance: DMatrix<f64>, bounds: PriorBounds) -> Result<Self> {
        let d = mean.len();
        if covariance.nrows() != d || covariance.ncols() != d || bounds.dim() != d {
            return Err(Error::DimensionMismatch("Gaussian mean, covariance and bounds".into()));
        }
        let precision = covariance.clone().cholesky().ok_or(Error::FactorizationFailure)?.inverse();
        Ok(Self { mean: DVector::from_vec(mean), covariance, precision, bounds })
    }

    pub fn mean(&self) -> &[f64] {
        self.mean.as_slice()
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }
}

impl LikelihoodModel for GaussianModel {
    fn bounds(&self) -> &PriorBounds {
        &self.bounds
    }

    fn param_labels(&self) -> Vec<String> {
        (0..self.mean.len()).map(|j| format!("x{j}")).collect()
    }

    fn evaluate(&self, theta: &[f64]) -> Evaluation {
        let r = DVector::from_column_slice(theta) - &self.mean;
        Evaluation::likelihood_only(-0.5 * (r.transpose() * &self.precision * &r)[(0, 0)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lem::{make_synthetic_problem, ProblemKind};

    #[test]
    fn landscape_truth_is_exact() {
        let p = make_synthetic_problem::<f64>(ProblemKind::Mountain, 10, 0).unwrap();
        let truth = p.true_parameters.to_values(&p.param_names).unwrap();
        let m = LandscapeModel::new(p).unwrap();
        let e = m.evaluate(&truth);
        assert_eq!(e, Evaluation { log_likelihood: 0.0, rmse_elev: Some(0.0), rmse_sed: Some(0.0) });
        assert_eq!(m.param_labels(), vec!["rainfall", "erodibility", "m", "n", "uplift"]);
    }

    #[test]
    fn landscape_wrong_arity_fails_softly() {
        let p = make_synthetic_problem::<f64>(ProblemKind::Margin, 8, 0).unwrap();
        let m = LandscapeModel::new(p).unwrap();
        assert_eq!(m.evaluate(&[1.0]).log_likelihood, FAILED_LOG_LIKELIHOOD);
    }

    #[test]
    fn gaussian_density() {
        let bounds = PriorBounds::new(vec![-5.0, -5.0], vec![5.0, 5.0]).unwrap();
        let cov = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let g = GaussianModel::new(vec![1.0, 0.0], cov, bounds).unwrap();
        assert_eq!(g.evaluate(&[1.0, 0.0]).log_likelihood, 0.0);
        assert!((g.evaluate(&[3.0, 1.0]).log_likelihood - (-0.5 * (4.0 / 2.0 + 1.0 / 0.5))).abs() < 1e-12);
    }
}
