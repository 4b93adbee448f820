//! The four batch commands. Each returns a report value; printing is left to the binary.

use std::fmt;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sapt_core::diagnostics::{cross_section, psrf, write_cross_section_csv, CrossSectionPoint, PsrfReport};
use sapt_core::engine::{read_chain_csv, run, EnsembleConfig, LandscapeModel, RunSummary};
use sapt_core::lem::{make_synthetic_problem, simulate, ProblemKind};
use sapt_core::surrogate::{CollectedSample, OptimizerKind, Provenance, Surrogate, SurrogateDataset, TrainConfig, TrainMode};
use sapt_core::LandscapeProblem;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::manifest::RunManifest;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenerateReport {
    pub path: PathBuf,
    pub kind: ProblemKind,
    pub grid: usize,
    pub true_parameters: Vec<(String, f64)>,
    pub seconds_per_simulation: f64,
    /// Sequential cost of a default-sized ensemble run.
    pub estimated_run_seconds: f64,
}

impl fmt::Display for GenerateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "wrote {} ({} problem, {}x{} grid)", self.path.display(), self.kind, self.grid, self.grid)?;
        writeln!(f, "true parameters:")?;
        for (name, value) in &self.true_parameters {
            writeln!(f, "  {name:<12} {value}")?;
        }
        write!(
            f,
            "one simulation takes {:.2} ms; a default ensemble run needs about {:.0} s of model time",
            self.seconds_per_simulation * 1e3,
            self.estimated_run_seconds
        )
    }
}

pub fn cmd_generate(kind: ProblemKind, grid: usize, seed: u64, out: &Path) -> Result<GenerateReport> {
    let problem: LandscapeProblem = make_synthetic_problem(kind, grid, seed)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    problem.save(out)?;

    let truth = problem.true_parameters.to_values(&problem.param_names)?;
    let started = Instant::now();
    simulate(&problem.initial_topography, &problem.true_parameters, &problem.lem_config)?;
    let per_sim = started.elapsed().as_secs_f64();
    let defaults = EnsembleConfig::default();
    Ok(GenerateReport {
        path: out.to_path_buf(),
        kind,
        grid,
        true_parameters: problem.param_names.iter().map(|p| p.label().to_string()).zip(truth).collect(),
        seconds_per_simulation: per_sim,
        estimated_run_seconds: per_sim * (defaults.replicas * defaults.samples) as f64,
    })
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub out: PathBuf,
    pub summary: RunSummary,
}

impl fmt::Display for RunOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.summary;
        writeln!(f, "wrote {}", self.out.display())?;
        writeln!(f, "{:<12} {:>12} {:>12} {:>12} {:>12}", "parameter", "mean", "std", "q05", "q95")?;
        for p in &s.posterior.parameters {
            writeln!(f, "{:<12} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e}", p.name, p.mean, p.std, p.q05, p.q95)?;
        }
        let rates: Vec<String> = s.acceptance_rates.iter().map(|r| format!("{r:.3}")).collect();
        writeln!(f, "acceptance rates: [{}]", rates.join(", "))?;
        if let Some(r) = s.swap_acceptance_rate {
            writeln!(f, "swap acceptance: {r:.3}")?;
        }
        writeln!(
            f,
            "evaluations: {} true, {} surrogate; {} surrogate trainings",
            s.true_evaluations, s.surrogate_evaluations, s.surrogate_trainings
        )?;
        if let Some(e) = s.rmse_elev {
            writeln!(f, "mean post-burn-in RMSE_elev: {e:.4}")?;
        }
        write!(f, "wall time: {:.2} s", s.wall_time)
    }
}

/// Runs the sampler described by `manifest` and writes every artifact to its output directory.
pub fn cmd_run(manifest: &RunManifest) -> Result<RunOutcome> {
    let manifest = manifest.effective();
    manifest.validate()?;
    let problem = manifest.problem.as_ref().expect("validated").load()?;
    let out = manifest.out.clone();
    fs::create_dir_all(&out)?;
    fs::write(out.join("manifest.json"), manifest.to_json()?)?;
    problem.save(out.join("problem.json"))?;

    let model = LandscapeModel::new(problem)?.with_delay(Duration::from_millis(manifest.slow_ms));
    let chains = run(&model, &manifest.ensemble, &manifest.train, manifest.seed)?;
    chains.write_dir(&out)?;
    Ok(RunOutcome { out, summary: RunSummary::from_chains(&chains)? })
}

/// One finished run as read back from its directory.
#[derive(Clone, Debug)]
pub struct RunDir {
    pub path: PathBuf,
    pub labels: Vec<String>,
    pub summary: RunSummary,
    /// Post-burn-in parameter vectors of all replicas, replica by replica.
    pub pooled: Vec<Vec<f64>>,
}

impl RunDir {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let summary: RunSummary = serde_json::from_str(&fs::read_to_string(path.join("summary.json"))?)?;
        let mut labels = Vec::new();
        let mut pooled = Vec::new();
        for i in 0..summary.replicas {
            let (l, records) = read_chain_csv(File::open(path.join("chains").join(format!("replica_{i}.csv")))?)?;
            labels = l;
            pooled.extend(records.into_iter().skip(summary.burn_in).map(|r| r.theta));
        }
        Ok(Self { path, labels, summary, pooled })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRmse {
    pub run: String,
    pub rmse_elev: Option<f64>,
    pub rmse_sed: Option<f64>,
    pub rmse_sur: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RmseReport {
    pub runs: Vec<RunRmse>,
    pub mean_rmse_elev: Option<f64>,
    pub mean_rmse_sed: Option<f64>,
    pub mean_rmse_sur: Option<f64>,
}

fn mean_present(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

#[derive(Clone, Debug)]
pub struct DiagnoseReport {
    pub psrf: PsrfReport,
    pub rmse: RmseReport,
    pub cross_section: Vec<CrossSectionPoint>,
}

impl fmt::Display for DiagnoseReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "PSRF over {} runs of {} samples", self.psrf.chains, self.psrf.length)?;
        for (label, r) in self.psrf.labels.iter().zip(&self.psrf.r_scores) {
            writeln!(f, "  {label:<12} {r:.4}")?;
        }
        writeln!(f, "  {:<12} {:.4}", "mean", self.psrf.mean_r_score)?;
        match self.rmse.mean_rmse_elev {
            Some(e) => write!(f, "mean RMSE_elev over runs: {e:.4}"),
            None => write!(f, "no RMSE_elev recorded"),
        }
    }
}

/// Convergence and accuracy reports over several runs of one configuration.
///
/// Each run contributes one chain to the PSRF: its post-burn-in samples from
/// every replica. `predictions` posterior samples, spread evenly over all runs,
/// are re-simulated for the middle-row cross-section.
pub fn cmd_diagnose(run_dirs: &[PathBuf], out: &Path, predictions: usize) -> Result<DiagnoseReport> {
    if run_dirs.len() < 2 {
        return Err(CliError::InsufficientRuns(run_dirs.len()));
    }
    let runs: Vec<RunDir> = run_dirs.iter().map(RunDir::load).collect::<Result<_>>()?;
    let chains: Vec<Vec<Vec<f64>>> = runs.iter().map(|r| r.pooled.clone()).collect();
    let psrf = psrf(&chains, &runs[0].labels)?;

    let rmse = RmseReport {
        runs: runs
            .iter()
            .map(|r| RunRmse {
                run: r.path.display().to_string(),
                rmse_elev: r.summary.rmse_elev,
                rmse_sed: r.summary.rmse_sed,
                rmse_sur: r.summary.rmse_sur,
            })
            .collect(),
        mean_rmse_elev: mean_present(runs.iter().map(|r| r.summary.rmse_elev)),
        mean_rmse_sed: mean_present(runs.iter().map(|r| r.summary.rmse_sed)),
        mean_rmse_sur: mean_present(runs.iter().map(|r| r.summary.rmse_sur)),
    };

    let problem = LandscapeProblem::load(runs[0].path.join("problem.json"))?;
    let all: Vec<&Vec<f64>> = runs.iter().flat_map(|r| &r.pooled).collect();
    let take = predictions.clamp(1, all.len().max(1));
    let stride = all.len() as f64 / take as f64;
    let mut grids = Vec::with_capacity(take);
    for k in 0..take {
        let Some(theta) = all.get((k as f64 * stride) as usize) else { break };
        let params = problem.parameters_from(theta)?;
        if let Ok(output) = simulate(&problem.initial_topography, &params, &problem.lem_config) {
            grids.push(output.final_topography);
        }
    }
    let truth = &problem.ground_truth.final_topography;
    let section = cross_section(truth, &grids, truth.rows() / 2)?;

    fs::create_dir_all(out)?;
    fs::write(out.join("psrf.json"), serde_json::to_string_pretty(&psrf)?)?;
    fs::write(out.join("rmse_report.json"), serde_json::to_string_pretty(&rmse)?)?;
    write_cross_section_csv(&section, BufWriter::new(File::create(out.join("cross_section.csv"))?))?;
    Ok(DiagnoseReport { psrf, rmse, cross_section: section })
}

/// The batch-ratio grid every surrogate evaluation reports.
pub const BATCH_RATIOS: [f64; 4] = [0.1, 0.2, 0.3, 0.4];
pub const MIN_EVAL_ROWS: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateEvalOptions {
    /// Rows kept from the dataset, sampled uniformly without replacement.
    pub max_rows: usize,
    pub holdout_fraction: f64,
    /// Consecutive training intervals the remaining rows are split into.
    pub intervals: usize,
    pub seed: u64,
    /// Epochs, batch size and hidden width; optimizer, mode, rate and ratio are set per grid cell.
    pub train: TrainConfig,
}

impl Default for SurrogateEvalOptions {
    fn default() -> Self {
        Self { max_rows: 5000, holdout_fraction: 0.1, intervals: 4, seed: 0, train: TrainConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateEvalRow {
    pub optimizer: OptimizerKind,
    pub mode: TrainMode,
    pub batch_ratio: f64,
    /// Mean squared error on the held-out rows, in normalized likelihood units.
    pub holdout_mse: f64,
    /// Training-set error reported by the last training.
    pub train_mse: f64,
    /// Training time summed over all intervals.
    pub wall_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateEvalReport {
    pub rows: usize,
    pub holdout: usize,
    pub intervals: usize,
    pub results: Vec<SurrogateEvalRow>,
}

impl fmt::Display for SurrogateEvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} training rows in {} intervals, {} held out", self.rows, self.intervals, self.holdout)?;
        writeln!(f, "{:<6} {:<20} {:>6} {:>12} {:>12} {:>10}", "opt", "mode", "ratio", "holdout_mse", "train_mse", "time_s")?;
        for r in &self.results {
            writeln!(
                f,
                "{:<6} {:<20} {:>6.1} {:>12.5} {:>12.5} {:>10.4}",
                r.optimizer.as_str(),
                r.mode.as_str(),
                r.batch_ratio,
                r.holdout_mse,
                r.train_mse,
                r.wall_time
            )?;
        }
        Ok(())
    }
}

fn to_collected(rows: &[&sapt_core::surrogate::DatasetRow]) -> Vec<CollectedSample> {
    rows.iter()
        .map(|r| CollectedSample {
            theta: r.theta.clone(),
            tempered_log_likelihood: r.log_likelihood / r.temperature,
            temperature: r.temperature,
            provenance: Provenance::True,
        })
        .collect()
}

/// Trains every {optimizer} × {mode} × batch-ratio combination over the same
/// interval sequence and scores it on a common holdout.
pub fn surrogate_eval(dataset: &SurrogateDataset, bounds: &sapt_core::proposals::PriorBounds, opts: &SurrogateEvalOptions) -> Result<SurrogateEvalReport> {
    if dataset.len() < MIN_EVAL_ROWS {
        return Err(CliError::EmptyInput(format!("surrogate dataset has {} usable rows, need {MIN_EVAL_ROWS}", dataset.len())));
    }
    if opts.intervals == 0 || !(0.0..1.0).contains(&opts.holdout_fraction) {
        return Err(CliError::Config("need at least one interval and a holdout fraction in [0, 1)".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut keep: Vec<usize> = (0..dataset.len()).collect();
    keep.shuffle(&mut rng);
    keep.truncate(opts.max_rows.min(dataset.len()));
    let n_holdout = (keep.len() as f64 * opts.holdout_fraction).round() as usize;
    let holdout: Vec<usize> = keep[..n_holdout].to_vec();
    let mut train: Vec<usize> = keep[n_holdout..].to_vec();
    // Training rows keep their collection order, so later intervals hold later samples.
    train.sort_unstable();

    let rows = dataset.rows();
    let chunk = train.len().div_ceil(opts.intervals);
    let batches: Vec<Vec<CollectedSample>> =
        train.chunks(chunk).map(|c| to_collected(&c.iter().map(|&i| &rows[i]).collect::<Vec<_>>())).collect();

    let mut results = Vec::new();
    for optimizer in [OptimizerKind::Sgd, OptimizerKind::Adam] {
        for mode in [TrainMode::TransferAndTrain, TrainMode::FromScratch] {
            for ratio in BATCH_RATIOS {
                let mut cfg = TrainConfig::new(optimizer, mode);
                cfg.epochs = opts.train.epochs;
                cfg.batch_size = opts.train.batch_size;
                cfg.hidden = opts.train.hidden;
                cfg.batch_ratio = ratio;
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(1));
                let mut ds = SurrogateDataset::new(bounds);
                let mut surrogate = Surrogate::<f64>::new(ds.spec().clone(), cfg, &mut rng)?;
                let mut wall_time = 0.0;
                let mut train_mse = f64::NAN;
                for batch in &batches {
                    ds.collect_interval(batch)?;
                    let report = surrogate.train(&ds, &mut rng)?;
                    wall_time += report.wall_time;
                    train_mse = report.mse;
                }
                let spec = &surrogate.spec;
                let mut sq = 0.0;
                for &i in &holdout {
                    let y = spec.normalize_ll(rows[i].log_likelihood)?;
                    let p = spec.normalize_ll(surrogate.predict(&rows[i].theta)?)?;
                    sq += (p - y).powi(2);
                }
                let holdout_mse = if holdout.is_empty() { f64::NAN } else { sq / holdout.len() as f64 };
                results.push(SurrogateEvalRow { optimizer, mode, batch_ratio: ratio, holdout_mse, train_mse, wall_time });
            }
        }
    }
    Ok(SurrogateEvalReport { rows: train.len(), holdout: holdout.len(), intervals: batches.len(), results })
}

/// Reads a run's `surrogate_dataset.csv`, evaluates the training grid and writes
/// `surrogate_eval.json` and `surrogate_eval.csv` to `out`.
pub fn cmd_surrogate_eval(dataset_csv: &Path, problem: &Path, out: &Path, opts: &SurrogateEvalOptions) -> Result<SurrogateEvalReport> {
    let problem = LandscapeProblem::load(problem)?;
    let dataset = SurrogateDataset::read_csv(File::open(dataset_csv)?, &problem.prior_bounds)?;
    let report = surrogate_eval(&dataset, &problem.prior_bounds, opts)?;
    fs::create_dir_all(out)?;
    fs::write(out.join("surrogate_eval.json"), serde_json::to_string_pretty(&report)?)?;
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(out.join("surrogate_eval.csv"))?));
    for r in &report.results {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(report)
}
