//! Synthetic benchmark problems with noise-free ground truth.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lem::grid::GridTopography;
use crate::lem::model::{simulate, LemConfig, ParamName, ParameterVector, SimulationOutput};
use crate::proposals::PriorBounds;
use crate::scalar::Real;

pub const MIN_GRID_SIZE: usize = 8;
pub const CELL_SIZE: f64 = 1000.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    /// Initially flat, uplifted block without marine processes.
    Mountain,
    /// Sloping coastal surface crossing sea level, no uplift.
    Margin,
}

impl ProblemKind {
    pub fn param_names(self) -> Vec<ParamName> {
        use ParamName::*;
        match self {
            ProblemKind::Mountain => vec![Rainfall, Erodibility, MExponent, NExponent, Uplift],
            ProblemKind::Margin => vec![Rainfall, Erodibility, MExponent, NExponent, CMarine, CSurface],
        }
    }

    pub fn true_parameters<T: Real>(self) -> ParameterVector<T> {
        let (c_marine, c_surface, uplift) = match self {
            ProblemKind::Mountain => (None, None, Some(T::lit(1.0))),
            ProblemKind::Margin => (Some(T::lit(0.5)), Some(T::lit(0.8)), None),
        };
        ParameterVector {
            rainfall: T::lit(1.5),
            erodibility: T::lit(5.0e-6),
            m_exponent: T::lit(0.5),
            n_exponent: T::lit(1.0),
            c_marine,
            c_surface,
            uplift,
        }
    }

    pub fn prior_bounds(self) -> PriorBounds {
        let interval = |name: ParamName| match name {
            ParamName::Rainfall => (0.0, 3.0),
            ParamName::Erodibility => (3.0e-6, 7.0e-6),
            ParamName::MExponent | ParamName::NExponent => (0.0, 2.0),
            ParamName::CMarine => (0.3, 0.7),
            ParamName::CSurface => (0.6, 1.0),
            ParamName::Uplift => (0.1, 1.7),
        };
        let (lower, upper) = self.param_names().into_iter().map(interval).unzip();
        PriorBounds::new(lower, upper).expect("static prior table is valid")
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Mountain => "mountain",
            ProblemKind::Margin => "margin",
        })
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mountain" => Ok(ProblemKind::Mountain),
            "margin" => Ok(ProblemKind::Margin),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

/// An inversion target: initial surface, synthetic observations and priors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Problem<T> {
    pub name: String,
    pub kind: ProblemKind,
    pub param_names: Vec<ParamName>,
    pub initial_topography: GridTopography<T>,
    pub ground_truth: SimulationOutput<T>,
    pub true_parameters: ParameterVector<T>,
    pub prior_bounds: PriorBounds,
    pub lem_config: LemConfig,
}

impl<T: Real> Problem<T> {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl<T: Real> Problem<T> {
    pub fn n_params(&self) -> usize {
        self.param_names.len()
    }

    pub fn parameters_from(&self, values: &[f64]) -> Result<ParameterVector<T>> {
        let values: Vec<T> = values.iter().map(|&v| T::lit(v)).collect();
        ParameterVector::from_values(&self.param_names, &values)
    }

    pub fn validate(&self) -> Result<()> {
        self.lem_config.validate(&self.initial_topography)?;
        self.initial_topography.check_shape(&self.ground_truth.final_topography)?;
        if self.prior_bounds.dim() != self.param_names.len() {
            return Err(Error::DimensionMismatch("prior bounds do not match parameter list".into()));
        }
        let truth = self.true_parameters.to_values(&self.param_names)?;
        let truth: Vec<f64> = truth.iter().map(|v| v.to_f64_lossy()).collect();
        if !self.prior_bounds.contains(&truth) {
            return Err(Error::InvalidConfig("true parameters lie outside the prior box".into()));
        }
        Ok(())
    }
}

/// Generates a problem whose ground truth is the forward model run at the true parameters.
pub fn make_synthetic_problem<T: Real>(kind: ProblemKind, grid_size: usize, seed: u64) -> Result<Problem<T>> {
    if grid_size < MIN_GRID_SIZE {
        return Err(Error::InvalidConfig(format!("grid size must be at least {MIN_GRID_SIZE}, got {grid_size}")));
    }
    let n = grid_size;
    let cell = T::lit(CELL_SIZE);
    let initial = match kind {
        ProblemKind::Mountain => GridTopography::flat(n, n, cell, T::zero())?,
        ProblemKind::Margin => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            GridTopography::from_fn(n, n, cell, T::zero(), |_, c| {
                let ramp = -300.0 + 1100.0 * c as f64 / (n - 1) as f64;
                T::lit(ramp + rng.random_range(-25.0..25.0))
            })?
        }
    };
    let lem_config = LemConfig::desk(n, n);
    let true_parameters = kind.true_parameters::<T>();
    let ground_truth = simulate(&initial, &true_parameters, &lem_config)?;
    let problem = Problem {
        name: format!("{kind}-{n}x{n}-seed{seed}"),
        kind,
        param_names: kind.param_names(),
        initial_topography: initial,
        ground_truth,
        true_parameters,
        prior_bounds: kind.prior_bounds(),
        lem_config,
    };
    problem.validate()?;
    Ok(problem)
}
