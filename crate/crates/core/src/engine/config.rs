use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::proposals::{ArwConfig, ProposalKind, RwConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecutionMode {
    /// One worker thread per replica.
    Parallel,
    /// Replicas advanced round-robin on the calling thread.
    Sequential,
}

impl FromStr for ExecutionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parallel" => Ok(ExecutionMode::Parallel),
            "sequential" => Ok(ExecutionMode::Sequential),
            other => Err(Error::InvalidConfig(format!("unknown execution mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnsembleConfig {
    pub replicas: usize,
    /// Samples per replica.
    pub samples: usize,
    pub swap_interval: usize,
    /// Samples between surrogate trainings, as a fraction of `samples`.
    pub surrogate_interval: f64,
    pub s_prob: f64,
    pub t_max: f64,
    pub burn_in: f64,
    pub stage2_start: f64,
    pub proposal: ProposalKind,
    pub rw: RwConfig,
    pub arw: ArwConfig,
    /// Every this many surrogate evaluations the true model is also run for logging.
    pub shadow_every: usize,
    pub execution: ExecutionMode,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            replicas: 8,
            samples: 5000,
            swap_interval: 3,
            surrogate_interval: 0.05,
            s_prob: 0.6,
            t_max: 2.0,
            burn_in: 0.5,
            stage2_start: 0.5,
            proposal: ProposalKind::Arw,
            rw: RwConfig::default(),
            arw: ArwConfig::default(),
            shadow_every: 20,
            execution: ExecutionMode::Parallel,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.replicas < 2 {
            return fail(format!("replicas must be at least 2, got {}", self.replicas));
        }
        if self.samples == 0 {
            return fail("samples must be at least 1".into());
        }
        if self.swap_interval == 0 {
            return fail("swap interval must be at least 1".into());
        }
        if !(self.surrogate_interval > 0.0 && self.surrogate_interval < 1.0) {
            return fail(format!("surrogate interval must lie in (0, 1), got {}", self.surrogate_interval));
        }
        if !(self.s_prob >= 0.0 && self.s_prob < 1.0) {
            return fail(format!("surrogate probability must lie in [0, 1), got {}", self.s_prob));
        }
        if !(self.t_max >= 1.0) || !self.t_max.is_finite() {
            return fail(format!("maximum temperature must be >= 1, got {}", self.t_max));
        }
        if !(self.burn_in >= 0.0 && self.burn_in < 1.0) {
            return fail(format!("burn-in must lie in [0, 1), got {}", self.burn_in));
        }
        if !(self.stage2_start >= 0.0 && self.stage2_start <= 1.0) {
            return fail(format!("second-stage start must lie in [0, 1], got {}", self.stage2_start));
        }
        if !(self.rw.phi >= 0.0) {
            return fail("random-walk step fraction must be non-negative".into());
        }
        if self.arw.adapt_interval == 0 || !(self.arw.min_step_fraction > 0.0) {
            return fail("adaptive proposal needs a positive interval and step floor".into());
        }
        if self.shadow_every == 0 {
            return fail("shadow evaluation period must be at least 1".into());
        }
        Ok(())
    }

    /// Samples per surrogate interval (at least one).
    pub fn interval_len(&self) -> usize {
        ((self.surrogate_interval * self.samples as f64).round() as usize).max(1)
    }

    pub fn burn_in_index(&self) -> usize {
        (self.burn_in * self.samples as f64).floor() as usize
    }

    pub fn stage2_index(&self) -> usize {
        (self.stage2_start * self.samples as f64).floor() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_configuration_is_valid() {
        let c = EnsembleConfig { replicas: 8, t_max: 2.0, swap_interval: 3, samples: 5000, burn_in: 0.5, ..Default::default() };
        c.validate().unwrap();
        assert_eq!((c.interval_len(), c.burn_in_index(), c.stage2_index()), (250, 2500, 2500));
    }

    #[test]
    fn invalid_fields() {
        let base = EnsembleConfig::default();
        for bad in [
            EnsembleConfig { replicas: 1, ..base.clone() },
            EnsembleConfig { s_prob: 1.0, ..base.clone() },
            EnsembleConfig { surrogate_interval: 0.0, ..base.clone() },
            EnsembleConfig { swap_interval: 0, ..base.clone() },
            EnsembleConfig { burn_in: 1.0, ..base.clone() },
            EnsembleConfig { t_max: 0.9, ..base.clone() },
            EnsembleConfig { samples: 0, ..base.clone() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))), "{bad:?}");
        }
    }

    #[test]
    fn partial_json_uses_defaults() {
        let c: EnsembleConfig = serde_json::from_str(r#"{"replicas": 4, "proposal": "rw", "execution": "sequential"}"#).unwrap();
        assert_eq!((c.replicas, c.proposal, c.execution, c.samples), (4, ProposalKind::Rw, ExecutionMode::Sequential, 5000));
    }
}
