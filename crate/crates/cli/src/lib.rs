//! Batch front end for the sampler: generate problems, run ensembles, and
//! post-process finished runs.

pub mod args;
pub mod commands;
pub mod error;
pub mod manifest;

pub use args::{execute, Cli, Command, RunArgs};
pub use commands::{
    cmd_diagnose, cmd_generate, cmd_run, cmd_surrogate_eval, surrogate_eval, DiagnoseReport, GenerateReport, RmseReport, RunDir, RunOutcome,
    RunRmse, SurrogateEvalOptions, SurrogateEvalReport, SurrogateEvalRow, BATCH_RATIOS, MIN_EVAL_ROWS,
};
pub use error::{CliError, Result};
pub use manifest::{ProblemSource, RunManifest, RunMode};
