//! Mini-batch training and the manager-side surrogate bundle.

use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::surrogate::dataset::{NormalizationSpec, SurrogateDataset};
use crate::surrogate::network::SurrogateNetwork;
use crate::surrogate::optim::{adam_step, sgd_step, AdamState, OptimizerKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainMode {
    /// Keep the current weights and fit only the newest interval's rows.
    TransferAndTrain,
    /// Reinitialize and fit every accumulated row.
    FromScratch,
}

impl TrainMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TrainMode::TransferAndTrain => "transfer_and_train",
            TrainMode::FromScratch => "from_scratch",
        }
    }
}

impl FromStr for TrainMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "transfer_and_train" | "transfer" => Ok(TrainMode::TransferAndTrain),
            "from_scratch" | "scratch" => Ok(TrainMode::FromScratch),
            other => Err(Error::InvalidConfig(format!("unknown training mode `{other}`"))),
        }
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adam" => Ok(OptimizerKind::Adam),
            "sgd" => Ok(OptimizerKind::Sgd),
            other => Err(Error::InvalidConfig(format!("unknown optimizer `{other}`"))),
        }
    }
}

impl OptimizerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OptimizerKind::Adam => "adam",
            OptimizerKind::Sgd => "sgd",
        }
    }

    pub fn default_learning_rate(self) -> f64 {
        match self {
            OptimizerKind::Adam => 1e-3,
            OptimizerKind::Sgd => 1e-2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub optimizer: OptimizerKind,
    pub mode: TrainMode,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub hidden: usize,
    /// Fraction of the candidate rows drawn (without replacement) for each training call.
    pub batch_ratio: f64,
}

impl TrainConfig {
    pub fn new(optimizer: OptimizerKind, mode: TrainMode) -> Self {
        Self { optimizer, mode, epochs: 20, batch_size: 32, learning_rate: optimizer.default_learning_rate(), hidden: 32, batch_ratio: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.hidden == 0 {
            return Err(Error::InvalidConfig("epochs, batch_size and hidden width must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig("learning rate must be positive".into()));
        }
        if !(self.batch_ratio > 0.0 && self.batch_ratio <= 1.0) {
            return Err(Error::InvalidConfig("batch ratio must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self::new(OptimizerKind::Adam, TrainMode::TransferAndTrain)
    }
}

/// Runs `cfg.epochs` shuffled mini-batch passes over `(inputs, targets)` and
/// returns the final mean squared error on those rows.
pub fn fit<T: Real, R: Rng + ?Sized>(
    net: &mut SurrogateNetwork<T>,
    adam: &mut AdamState<T>,
    inputs: &[Vec<T>],
    targets: &[T],
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<T> {
    if inputs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if inputs.len() != targets.len() {
        return Err(Error::LengthMismatch(inputs.len(), targets.len()));
    }
    let rate = T::lit(cfg.learning_rate);
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let mut xs: Vec<&[T]> = Vec::with_capacity(cfg.batch_size);
    let mut ys: Vec<T> = Vec::with_capacity(cfg.batch_size);
    for _ in 0..cfg.epochs {
        order.shuffle(rng);
        for chunk in order.chunks(cfg.batch_size) {
            xs.clear();
            ys.clear();
            for &i in chunk {
                xs.push(&inputs[i]);
                ys.push(targets[i]);
            }
            let grad = net.gradient(&xs, &ys)?;
            match cfg.optimizer {
                OptimizerKind::Adam => adam_step(net.params_mut(), &grad, adam),
                OptimizerKind::Sgd => sgd_step(net.params_mut(), &grad, rate),
            }
        }
    }
    net.mse(inputs, targets)
}

/// Maps a network output back to the log-likelihood scale, clamping it to the
/// observed range first.
pub fn predict_pseudo<T: Real>(net: &SurrogateNetwork<T>, theta: &[f64], spec: &NormalizationSpec) -> Result<f64> {
    let x: Vec<T> = spec.normalize_theta(theta).into_iter().map(T::lit).collect();
    let y = net.forward(&x)?.to_f64_lossy();
    spec.denormalize_ll(y.clamp(0.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub interval: usize,
    pub dataset_size: usize,
    pub rows_used: usize,
    pub mode: TrainMode,
    pub mse: f64,
    pub wall_time: f64,
}

/// Network, optimizer state and normalization owned by the manager. Replicas
/// receive clones of the trained state and only call [`predict`](Self::predict).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Surrogate<T> {
    pub network: SurrogateNetwork<T>,
    pub adam: AdamState<T>,
    pub spec: NormalizationSpec,
    pub config: TrainConfig,
    pub trainings: usize,
}

impl<T: Real> Surrogate<T> {
    pub fn new<R: Rng + ?Sized>(spec: NormalizationSpec, config: TrainConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let network = SurrogateNetwork::init(spec.dim(), config.hidden, rng);
        let adam = AdamState::new(network.params().len(), T::lit(config.learning_rate));
        Ok(Self { network, adam, spec, config, trainings: 0 })
    }

    pub fn is_ready(&self) -> bool {
        self.trainings > 0
    }

    /// Trains on the rows selected by the configured mode and returns timing
    /// and accuracy for the training log.
    pub fn train<R: Rng + ?Sized>(&mut self, dataset: &SurrogateDataset, rng: &mut R) -> Result<TrainReport> {
        let start = Instant::now();
        let mode = self.config.mode;
        let mut candidates = match mode {
            TrainMode::TransferAndTrain if self.is_ready() => dataset.newest_rows(),
            TrainMode::TransferAndTrain => dataset.all_rows(),
            TrainMode::FromScratch => {
                self.network = SurrogateNetwork::init(dataset.input_dim(), self.config.hidden, rng);
                self.adam.reset();
                dataset.all_rows()
            }
        };
        if candidates.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if self.config.batch_ratio < 1.0 {
            let keep = ((candidates.len() as f64 * self.config.batch_ratio).round() as usize).max(1);
            candidates.shuffle(rng);
            candidates.truncate(keep);
            candidates.sort_unstable();
        }
        let (xs, ys) = dataset.normalized(&candidates)?;
        let xs: Vec<Vec<T>> = xs.into_iter().map(|x| x.into_iter().map(T::lit).collect()).collect();
        let ys: Vec<T> = ys.into_iter().map(T::lit).collect();
        let mse = fit(&mut self.network, &mut self.adam, &xs, &ys, &self.config, rng)?;
        self.spec = dataset.spec().clone();
        self.trainings += 1;
        Ok(TrainReport {
            interval: dataset.intervals(),
            dataset_size: dataset.len(),
            rows_used: candidates.len(),
            mode,
            mse: mse.to_f64_lossy(),
            wall_time: start.elapsed().as_secs_f64(),
        })
    }

    pub fn predict(&self, theta: &[f64]) -> Result<f64> {
        if !self.is_ready() {
            return Err(Error::SurrogateNotReady);
        }
        predict_pseudo(&self.network, theta, &self.spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}
