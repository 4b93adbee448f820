//! The manager: segments sampling between synchronization points, resolves
//! swaps, trains the surrogate and switches to the second stage.
//!
//! Both execution modes drive the same [`ReplicaState::advance`] calls with the
//! same inputs; replicas only interact through values the manager hands out at
//! synchronization points, so parallel and sequential runs produce identical chains.

use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::Arc;
use std::time::Instant;

use crate::engine::chains::{PosteriorChains, SwapRecord, TimingRecord};
use crate::engine::config::{EnsembleConfig, ExecutionMode};
use crate::engine::ladder::{build_ladder, stage_transition};
use crate::engine::model::LikelihoodModel;
use crate::engine::moves::{swap_accept, swap_pairs};
use crate::engine::replica::{stream, Purpose, ReplicaState, SegmentContext, SegmentOutput, MANAGER};
use crate::error::{Error, Result};
use crate::surrogate::{Surrogate, SurrogateDataset, TrainConfig};

struct Job {
    state: ReplicaState,
    until: usize,
    ctx: Arc<SegmentContext>,
}

type JobResult = (usize, ReplicaState, Result<SegmentOutput>);

enum Dispatcher {
    Sequential,
    Parallel { jobs: Vec<Sender<Job>>, results: Receiver<JobResult> },
}

impl Dispatcher {
    fn advance(
        &self,
        states: &mut Vec<ReplicaState>,
        until: usize,
        ctx: &Arc<SegmentContext>,
        model: &dyn LikelihoodModel,
    ) -> Result<Vec<SegmentOutput>> {
        match self {
            Dispatcher::Sequential => states.iter_mut().map(|s| s.advance(until, model, ctx)).collect(),
            Dispatcher::Parallel { jobs, results } => {
                let m = states.len();
                for (state, tx) in states.drain(..).zip(jobs) {
                    tx.send(Job { state, until, ctx: Arc::clone(ctx) }).map_err(|_| worker_lost())?;
                }
                let mut slots: Vec<Option<(ReplicaState, Result<SegmentOutput>)>> = (0..m).map(|_| None).collect();
                for _ in 0..m {
                    let (i, state, out) = results.recv().map_err(|_| worker_lost())?;
                    slots[i] = Some((state, out));
                }
                let mut outputs = Vec::with_capacity(m);
                let mut first_err = None;
                for slot in slots {
                    let (state, out) = slot.ok_or_else(worker_lost)?;
                    states.push(state);
                    match out {
                        Ok(o) => outputs.push(o),
                        Err(e) => {
                            first_err.get_or_insert(e);
                        }
                    }
                }
                match first_err {
                    Some(e) => Err(e),
                    None => Ok(outputs),
                }
            }
        }
    }
}

fn worker_lost() -> Error {
    Error::Io(std::io::Error::other("replica worker terminated unexpectedly"))
}

fn next_multiple(done: usize, step: usize) -> usize {
    (done / step + 1) * step
}

/// Runs the tempered ensemble to completion.
pub fn run(model: &dyn LikelihoodModel, cfg: &EnsembleConfig, train: &TrainConfig, seed: u64) -> Result<PosteriorChains> {
    cfg.validate()?;
    train.validate()?;
    match cfg.execution {
        ExecutionMode::Sequential => manage(model, cfg, train, seed, &Dispatcher::Sequential),
        ExecutionMode::Parallel => std::thread::scope(|scope| {
            let (result_tx, results) = mpsc::channel::<JobResult>();
            let mut jobs = Vec::with_capacity(cfg.replicas);
            for i in 0..cfg.replicas {
                let (tx, rx) = mpsc::channel::<Job>();
                jobs.push(tx);
                let result_tx = result_tx.clone();
                scope.spawn(move || {
                    for mut job in rx {
                        let out = job.state.advance(job.until, model, &job.ctx);
                        if result_tx.send((i, job.state, out)).is_err() {
                            break;
                        }
                    }
                });
            }
            drop(result_tx);
            // Dropping the dispatcher closes the job channels, which ends the workers.
            let dispatcher = Dispatcher::Parallel { jobs, results };
            manage(model, cfg, train, seed, &dispatcher)
        }),
    }
}

fn manage(model: &dyn LikelihoodModel, cfg: &EnsembleConfig, train: &TrainConfig, seed: u64, dispatcher: &Dispatcher) -> Result<PosteriorChains> {
    let started = Instant::now();
    let bounds = model.bounds().clone();
    let total = cfg.samples;
    let interval = cfg.interval_len();
    let stage2 = cfg.stage2_index();
    let initial_ladder = build_ladder(cfg.replicas, cfg.t_max)?;
    let mut ladder = stage_transition(&initial_ladder, 0, stage2);

    let mut swap_rng = stream(seed, MANAGER, Purpose::Swap);
    let mut train_rng = stream(seed, MANAGER, Purpose::Training);
    let mut dataset = SurrogateDataset::new(&bounds);
    let use_surrogate = cfg.s_prob > 0.0;
    let mut surrogate = if use_surrogate {
        Some(Surrogate::<f64>::new(dataset.spec().clone(), train.clone(), &mut train_rng)?)
    } else {
        None
    };
    let mut ctx = Arc::new(SegmentContext { s_prob: cfg.s_prob, shadow_every: cfg.shadow_every, surrogate: None });

    let mut states: Vec<ReplicaState> =
        (0..cfg.replicas).map(|i| ReplicaState::new(i, ladder.get(i), cfg, &bounds, seed)).collect();

    let mut pending = Vec::new();
    let mut swaps = Vec::new();
    let mut training_log = Vec::new();
    let mut shadow_pairs = Vec::new();
    let (mut true_evaluations, mut surrogate_evaluations) = (0, 0);
    let (mut sampling, mut training, mut swapping) = (0.0, 0.0, 0.0);
    let mut sync = 0;
    let mut done = 0;

    while done < total {
        let mut until = next_multiple(done, cfg.swap_interval).min(next_multiple(done, interval)).min(total);
        if stage2 > done {
            until = until.min(stage2);
        }

        let t0 = Instant::now();
        let outputs = dispatcher.advance(&mut states, until, &ctx, model)?;
        sampling += t0.elapsed().as_secs_f64();
        done = until;
        for out in outputs {
            pending.extend(out.collected);
            shadow_pairs.extend(out.shadow_pairs);
            true_evaluations += out.true_evaluations;
            surrogate_evaluations += out.surrogate_evaluations;
        }
        if done == total {
            break;
        }

        if done % interval == 0 {
            let t0 = Instant::now();
            dataset.collect_interval(&pending)?;
            pending.clear();
            if let Some(s) = surrogate.as_mut() {
                match s.train(&dataset, &mut train_rng) {
                    Ok(report) => {
                        training_log.push(report);
                        ctx = Arc::new(SegmentContext { surrogate: Some(Arc::new(s.clone())), ..(*ctx).clone() });
                    }
                    // Every sample so far failed to simulate; keep using the true model.
                    Err(Error::EmptyDataset) => {}
                    Err(e) => return Err(e),
                }
            }
            training += t0.elapsed().as_secs_f64();
        }

        if done % cfg.swap_interval == 0 {
            let t0 = Instant::now();
            for (i, j) in swap_pairs(states.len(), sync) {
                let (li, lj) = (chain_ll(&states[i]), chain_ll(&states[j]));
                let decision = swap_accept(li, lj, states[i].temperature, states[j].temperature, &mut swap_rng);
                if decision.accepted {
                    let (a, b) = states.split_at_mut(j);
                    std::mem::swap(&mut a[i].chain, &mut b[0].chain);
                }
                swaps.push(SwapRecord { sync, sample: done, first: i, second: j, probability: decision.probability, accepted: decision.accepted });
            }
            sync += 1;
            swapping += t0.elapsed().as_secs_f64();
        }

        if done == stage2 {
            ladder = stage_transition(&ladder, done, stage2);
            for s in &mut states {
                s.temperature = ladder.get(s.index);
            }
        }
    }

    if !pending.is_empty() {
        dataset.collect_interval(&pending)?;
    }
    let wall_time = started.elapsed().as_secs_f64();
    let timing = [("sampling", sampling), ("surrogate_training", training), ("swaps", swapping), ("total", wall_time)]
        .into_iter()
        .map(|(phase, seconds)| TimingRecord { phase: phase.into(), seconds })
        .collect();
    Ok(PosteriorChains {
        labels: model.param_labels(),
        replicas: states.into_iter().map(|s| s.records).collect(),
        burn_in: cfg.burn_in_index(),
        temperatures: initial_ladder.temperatures().to_vec(),
        swaps,
        timing,
        training_log,
        shadow_pairs,
        dataset,
        surrogate: surrogate.filter(|s| s.is_ready()),
        true_evaluations,
        surrogate_evaluations,
        wall_time,
    })
}

fn chain_ll(state: &ReplicaState) -> f64 {
    state.chain.as_ref().map_or(f64::NEG_INFINITY, |c| c.log_likelihood)
}
