//! Student-t log-likelihoods for final elevation and the erosion/deposition record.
//!
//! Both noise variances carry inverse-gamma priors that are integrated out, so
//! each observation contributes `-(nu + 1)/2 * ln(1 + r^2 / nu)`. Normalizing
//! constants are dropped.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lem::{simulate, GridTopography, ParameterVector, Problem, SedimentRecord, SimulationOutput};
use crate::scalar::Real;

/// Log-likelihood assigned to proposals whose simulation failed.
pub const FAILED_LOG_LIKELIHOOD: f64 = -1.0e10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observations<T> {
    pub elevation_truth: GridTopography<T>,
    pub sediment_truth: SedimentRecord<T>,
}

impl<T: Real> Observations<T> {
    pub fn from_output(output: &SimulationOutput<T>) -> Self {
        Self { elevation_truth: output.final_topography.clone(), sediment_truth: output.sediment.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodConfig {
    pub nu_elev: usize,
    pub nu_sed: usize,
}

impl LikelihoodConfig {
    /// One degree of freedom per observed value.
    pub fn for_problem<T: Real>(problem: &Problem<T>) -> Self {
        Self {
            nu_elev: problem.initial_topography.len(),
            nu_sed: problem.lem_config.sediment_sites.len() * problem.lem_config.n_checkpoints,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nu_elev == 0 || self.nu_sed == 0 {
            return Err(Error::InvalidConfig("degrees of freedom must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLikelihood<T> {
    pub value: T,
    pub elev: T,
    pub sed: T,
}

impl<T: Real> LogLikelihood<T> {
    pub fn new(elev: T, sed: T) -> Self {
        Self { value: elev + sed, elev, sed }
    }

    pub fn failed() -> Self {
        let s = T::lit(FAILED_LOG_LIKELIHOOD);
        Self { value: s, elev: s, sed: T::zero() }
    }
}

fn student_t_sum<T: Real>(truth: &[T], pred: &[T], nu: usize) -> T {
    let nu = T::lit(nu as f64);
    let sum = truth.iter().zip(pred).fold(T::zero(), |acc, (&d, &f)| {
        let r = d - f;
        acc + (r * r / nu).ln_1p()
    });
    -(nu + T::one()) / T::lit(2.0) * sum
}

pub fn log_lik_elev<T: Real>(pred: &GridTopography<T>, truth: &GridTopography<T>, nu: usize) -> Result<T> {
    pred.check_shape(truth)?;
    Ok(student_t_sum(truth.elevations(), pred.elevations(), nu))
}

pub fn log_lik_sed<T: Real>(pred: &SedimentRecord<T>, truth: &SedimentRecord<T>, nu: usize) -> Result<T> {
    pred.check_shape(truth)?;
    Ok(student_t_sum(&truth.values, &pred.values, nu))
}

pub fn log_lik_combined<T: Real>(output: &SimulationOutput<T>, obs: &Observations<T>, cfg: &LikelihoodConfig) -> Result<LogLikelihood<T>> {
    let elev = log_lik_elev(&output.final_topography, &obs.elevation_truth, cfg.nu_elev)?;
    let sed = log_lik_sed(&output.sediment, &obs.sediment_truth, cfg.nu_sed)?;
    Ok(LogLikelihood::new(elev, sed))
}

/// Runs the forward model and scores it. Simulation failures yield the
/// sentinel likelihood and no prediction.
pub fn evaluate_true<T: Real>(
    params: &ParameterVector<T>,
    problem: &Problem<T>,
    cfg: &LikelihoodConfig,
) -> Result<(LogLikelihood<T>, Option<SimulationOutput<T>>)> {
    match simulate(&problem.initial_topography, params, &problem.lem_config) {
        Ok(output) => {
            let obs = Observations::from_output(&problem.ground_truth);
            let ll = log_lik_combined(&output, &obs, cfg)?;
            Ok((ll, Some(output)))
        }
        Err(Error::NumericalOverflow { .. }) => Ok((LogLikelihood::failed(), None)),
        Err(e) => Err(e),
    }
}
