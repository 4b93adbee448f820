//! Replica-exchange sampler with an optional learned likelihood.

pub mod chains;
pub mod config;
pub mod ladder;
pub mod model;
pub mod moves;
pub mod replica;
pub mod run;

pub use chains::{
    posterior_summary, quantile, read_chain_csv, summarize_samples, write_chain_csv, ParameterSummary, PosteriorChains, PosteriorSummary,
    RunSummary, SwapRecord, TimingRecord,
};
pub use config::{EnsembleConfig, ExecutionMode};
pub use ladder::{build_ladder, stage_transition, TemperatureLadder};
pub use model::{Evaluation, GaussianModel, LandscapeModel, LikelihoodModel};
pub use moves::{
    acceptance_probability, blend_pseudo, choose_evaluation, metropolis_accept, swap_accept, swap_pairs, swap_probability, EvaluationChoice,
    LikelihoodRing, SwapDecision,
};
pub use replica::{ChainState, ReplicaState, SampleRecord, SegmentContext, SegmentOutput};
pub use run::run;
