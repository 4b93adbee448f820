use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sapt_core::engine::ExecutionMode;
use sapt_core::lem::ProblemKind;
use sapt_core::proposals::ProposalKind;
use sapt_core::surrogate::{OptimizerKind, TrainMode};

use crate::commands::{cmd_diagnose, cmd_generate, cmd_run, cmd_surrogate_eval, SurrogateEvalOptions};
use crate::error::Result;
use crate::manifest::{ProblemSource, RunManifest, RunMode};

#[derive(Debug, Parser)]
#[command(name = "sapt", version, about = "Surrogate-assisted parallel tempering for landscape-evolution inversion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a synthetic problem bundle (initial surface, observations, priors).
    Generate {
        #[arg(long)]
        kind: ProblemKind,
        #[arg(long, default_value_t = 32)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the sampler and write chains, swaps, timings and summaries.
    Run(RunArgs),
    /// PSRF, RMSE and cross-section reports over several finished runs.
    Diagnose {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Posterior samples re-simulated for the cross-section.
        #[arg(long, default_value_t = 50)]
        predictions: usize,
    },
    /// Compare optimizers, training modes and batch ratios on a collected dataset.
    SurrogateEval {
        #[arg(long)]
        dataset: PathBuf,
        /// Problem bundle supplying the parameter bounds.
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5000)]
        rows: usize,
        #[arg(long, default_value_t = 0.1)]
        holdout: f64,
        #[arg(long, default_value_t = 4)]
        intervals: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        epochs: Option<usize>,
    },
}

/// Flags of `sapt run`. Anything given here overrides the `--config` manifest.
#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// JSON run manifest.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Saved problem bundle.
    #[arg(long, conflicts_with = "kind")]
    pub problem: Option<PathBuf>,
    /// Generate the problem instead of loading one.
    #[arg(long)]
    pub kind: Option<ProblemKind>,
    #[arg(long, requires = "kind")]
    pub grid: Option<usize>,
    #[arg(long, requires = "kind")]
    pub problem_seed: Option<u64>,
    #[arg(long)]
    pub replicas: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub swap_interval: Option<usize>,
    #[arg(long, visible_alias = "psi")]
    pub surrogate_interval: Option<f64>,
    #[arg(long)]
    pub s_prob: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub burn_in: Option<f64>,
    #[arg(long)]
    pub proposal: Option<ProposalKind>,
    #[arg(long)]
    pub optimizer: Option<OptimizerKind>,
    #[arg(long)]
    pub train_mode: Option<TrainMode>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub mode: Option<RunMode>,
    #[arg(long)]
    pub execution: Option<ExecutionMode>,
    #[arg(long)]
    pub slow_ms: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    pub fn manifest(&self) -> Result<RunManifest> {
        let mut m = match &self.config {
            Some(path) => RunManifest::load(path)?,
            None => RunManifest::default(),
        };
        if let Some(path) = &self.problem {
            m.problem = Some(ProblemSource::Path { path: path.clone() });
        }
        if let Some(kind) = self.kind {
            m.problem = Some(ProblemSource::Generate { kind, grid: self.grid.unwrap_or(32), seed: self.problem_seed.unwrap_or(0) });
        }
        let e = &mut m.ensemble;
        macro_rules! set {
            ($($flag:ident => $target:expr),* $(,)?) => { $(if let Some(v) = self.$flag { $target = v; })* };
        }
        set! {
            replicas => e.replicas,
            samples => e.samples,
            swap_interval => e.swap_interval,
            surrogate_interval => e.surrogate_interval,
            s_prob => e.s_prob,
            t_max => e.t_max,
            burn_in => e.burn_in,
            proposal => e.proposal,
            execution => e.execution,
            optimizer => m.train.optimizer,
            train_mode => m.train.mode,
            seed => m.seed,
            mode => m.mode,
            slow_ms => m.slow_ms,
        }
        if self.optimizer.is_some() {
            m.train.learning_rate = m.train.optimizer.default_learning_rate();
        }
        if let Some(out) = &self.out {
            m.out = out.clone();
        }
        Ok(m)
    }
}

/// Runs one parsed command, printing its report to stdout.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { kind, grid, seed, out } => println!("{}", cmd_generate(kind, grid, seed, &out)?),
        Command::Run(args) => println!("{}", cmd_run(&args.manifest()?)?),
        Command::Diagnose { runs, out, predictions } => println!("{}", cmd_diagnose(&runs, &out, predictions)?),
        Command::SurrogateEval { dataset, problem, out, rows, holdout, intervals, seed, epochs } => {
            let mut opts = SurrogateEvalOptions { max_rows: rows, holdout_fraction: holdout, intervals, seed, ..Default::default() };
            if let Some(epochs) = epochs {
                opts.train.epochs = epochs;
            }
            print!("{}", cmd_surrogate_eval(&dataset, &problem, &out, &opts)?);
        }
    }
    Ok(())
}
