//! Neural-network emulator of the log-likelihood surface.

pub mod dataset;
pub mod network;
pub mod optim;
pub mod train;

pub use dataset::{CollectedSample, DatasetRow, NormalizationSpec, Provenance, SurrogateDataset};
pub use network::{Gradient, SurrogateNetwork};
pub use optim::{adam_step, sgd_step, AdamState, OptimizerKind};
pub use train::{fit, predict_pseudo, Surrogate, TrainConfig, TrainMode, TrainReport};
