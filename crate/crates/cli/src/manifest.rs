//! Run manifests: everything needed to reproduce one sampler run.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sapt_core::engine::EnsembleConfig;
use sapt_core::lem::{make_synthetic_problem, ProblemKind};
use sapt_core::surrogate::TrainConfig;
use sapt_core::LandscapeProblem;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    /// Plain parallel tempering: every proposal runs the forward model.
    Pt,
    /// Surrogate-assisted parallel tempering.
    #[default]
    Sapt,
}

impl FromStr for RunMode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pt" => Ok(RunMode::Pt),
            "sapt" => Ok(RunMode::Sapt),
            other => Err(CliError::Config(format!("unknown mode `{other}`"))),
        }
    }
}

/// Either a saved problem bundle or the arguments to generate one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemSource {
    Path { path: PathBuf },
    Generate { kind: ProblemKind, grid: usize, seed: u64 },
}

impl ProblemSource {
    pub fn load(&self) -> Result<LandscapeProblem> {
        Ok(match self {
            ProblemSource::Path { path } => LandscapeProblem::load(path)?,
            ProblemSource::Generate { kind, grid, seed } => make_synthetic_problem(*kind, *grid, *seed)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunManifest {
    pub problem: Option<ProblemSource>,
    pub ensemble: EnsembleConfig,
    pub train: TrainConfig,
    pub seed: u64,
    pub out: PathBuf,
    pub mode: RunMode,
    /// Artificial delay added to every forward-model evaluation, in milliseconds.
    pub slow_ms: u64,
}

impl Default for RunManifest {
    fn default() -> Self {
        Self {
            problem: None,
            ensemble: EnsembleConfig::default(),
            train: TrainConfig::default(),
            seed: 0,
            out: PathBuf::from("run"),
            mode: RunMode::Sapt,
            slow_ms: 0,
        }
    }
}

impl RunManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("manifest: {e}")))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The manifest a run actually uses: `pt` mode pins the surrogate probability to zero.
    pub fn effective(&self) -> Self {
        let mut m = self.clone();
        if m.mode == RunMode::Pt {
            m.ensemble.s_prob = 0.0;
        }
        m
    }

    pub fn validate(&self) -> Result<()> {
        if self.problem.is_none() {
            return Err(CliError::Config("no problem given (use --problem or --kind)".into()));
        }
        self.ensemble.validate()?;
        self.train.validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pt_mode_zeroes_surrogate_probability() {
        let m = RunManifest { mode: RunMode::Pt, ..Default::default() };
        assert_eq!(m.ensemble.s_prob, 0.6);
        assert_eq!(m.effective().ensemble.s_prob, 0.0);
        let s = RunManifest::default();
        assert_eq!(s.effective(), s);
    }

    #[test]
    fn problem_source_forms() {
        let p: ProblemSource = serde_json::from_str(r#"{"path": "a/problem.json"}"#).unwrap();
        assert_eq!(p, ProblemSource::Path { path: "a/problem.json".into() });
        let g: ProblemSource = serde_json::from_str(r#"{"kind": "margin", "grid": 16, "seed": 3}"#).unwrap();
        assert_eq!(g, ProblemSource::Generate { kind: ProblemKind::Margin, grid: 16, seed: 3 });
    }

    #[test]
    fn missing_problem_is_a_config_error() {
        assert!(matches!(RunManifest::default().validate(), Err(CliError::Config(_))));
    }
}
