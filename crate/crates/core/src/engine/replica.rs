use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::config::EnsembleConfig;
use crate::engine::model::LikelihoodModel;
use crate::engine::moves::{blend_pseudo, choose_evaluation, metropolis_accept, EvaluationChoice, LikelihoodRing};
use crate::error::Result;
use crate::likelihood::FAILED_LOG_LIKELIHOOD;
use crate::proposals::{PriorBounds, Proposer};
use crate::surrogate::{CollectedSample, Provenance, Surrogate};

/// Independent random streams, one per purpose, so that enabling the
/// surrogate never perturbs the proposal sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Purpose {
    Init = 0,
    Proposal = 1,
    Acceptance = 2,
    Choice = 3,
    Swap = 4,
    Training = 5,
}

pub(crate) const MANAGER: u64 = 1 << 40;

pub(crate) fn stream(seed: u64, owner: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(owner * 16 + purpose as u64);
    rng
}

/// The part of a replica that moves with a swap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub theta: Vec<f64>,
    /// Untempered log-likelihood of `theta`.
    pub log_likelihood: f64,
    pub provenance: Provenance,
    pub rmse_elev: Option<f64>,
    pub rmse_sed: Option<f64>,
    pub ring: LikelihoodRing,
}

/// Chain state after one sampling step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample: usize,
    pub theta: Vec<f64>,
    pub log_likelihood: f64,
    /// Origin of the chain state's likelihood.
    pub provenance: Provenance,
    /// How this step's proposal was scored.
    pub proposal_provenance: Provenance,
    pub accepted: bool,
    pub temperature: f64,
    pub rmse_elev: Option<f64>,
    pub rmse_sed: Option<f64>,
}

/// Read-only inputs broadcast by the manager for one segment.
#[derive(Clone, Debug)]
pub struct SegmentContext {
    pub s_prob: f64,
    pub shadow_every: usize,
    pub surrogate: Option<Arc<Surrogate<f64>>>,
}

impl SegmentContext {
    fn surrogate_ready(&self) -> bool {
        self.surrogate.as_ref().is_some_and(|s| s.is_ready())
    }
}

/// What a replica hands back at a synchronization point.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SegmentOutput {
    pub collected: Vec<CollectedSample>,
    /// `(true, pseudo)` log-likelihood pairs from shadow evaluations.
    pub shadow_pairs: Vec<(f64, f64)>,
    pub true_evaluations: usize,
    pub surrogate_evaluations: usize,
    pub busy_seconds: f64,
}

#[derive(Clone, Debug)]
pub struct ReplicaState {
    pub index: usize,
    pub temperature: f64,
    pub chain: Option<ChainState>,
    pub samples_done: usize,
    pub accepted: usize,
    pub surrogate_uses: usize,
    pub records: Vec<SampleRecord>,
    proposer: Proposer,
    init_rng: ChaCha8Rng,
    proposal_rng: ChaCha8Rng,
    acceptance_rng: ChaCha8Rng,
    choice_rng: ChaCha8Rng,
}

impl ReplicaState {
    pub fn new(index: usize, temperature: f64, cfg: &EnsembleConfig, bounds: &PriorBounds, seed: u64) -> Self {
        let owner = index as u64;
        Self {
            index,
            temperature,
            chain: None,
            samples_done: 0,
            accepted: 0,
            surrogate_uses: 0,
            records: Vec::with_capacity(cfg.samples),
            proposer: Proposer::new(cfg.proposal, cfg.rw, cfg.arw, bounds),
            init_rng: stream(seed, owner, Purpose::Init),
            proposal_rng: stream(seed, owner, Purpose::Proposal),
            acceptance_rng: stream(seed, owner, Purpose::Acceptance),
            choice_rng: stream(seed, owner, Purpose::Choice),
        }
    }

    fn collect(&self, out: &mut SegmentOutput, theta: &[f64], log_likelihood: f64) {
        out.collected.push(CollectedSample {
            theta: theta.to_vec(),
            tempered_log_likelihood: log_likelihood / self.temperature,
            temperature: self.temperature,
            provenance: Provenance::True,
        });
    }

    /// Runs sampling steps until `until` samples are done. The first call also
    /// draws and scores the starting point.
    pub fn advance(&mut self, until: usize, model: &dyn LikelihoodModel, ctx: &SegmentContext) -> Result<SegmentOutput> {
        let started = Instant::now();
        let mut out = SegmentOutput::default();
        let bounds = model.bounds();
        let ready = ctx.surrogate_ready();

        if self.chain.is_none() {
            let theta = bounds.sample_uniform(&mut self.init_rng);
            let ev = model.evaluate(&theta);
            out.true_evaluations += 1;
            self.collect(&mut out, &theta, ev.log_likelihood);
            self.proposer.record(&theta);
            self.chain = Some(ChainState {
                theta,
                log_likelihood: ev.log_likelihood,
                provenance: Provenance::True,
                rmse_elev: ev.rmse_elev,
                rmse_sed: ev.rmse_sed,
                ring: [ev.log_likelihood].into_iter().collect(),
            });
        }

        while self.samples_done < until {
            let chain = self.chain.as_ref().expect("initialized above");
            let proposal = self.proposer.propose(&chain.theta, bounds, &mut self.proposal_rng);
            let choice = choose_evaluation(&mut self.choice_rng, ctx.s_prob, ready);
            let (ll, provenance, rmse_elev, rmse_sed) = match (choice, &ctx.surrogate) {
                (EvaluationChoice::Surrogate, Some(surrogate)) => {
                    let local = blend_pseudo(surrogate.predict(&proposal)?, &chain.ring);
                    out.surrogate_evaluations += 1;
                    self.surrogate_uses += 1;
                    if self.surrogate_uses % ctx.shadow_every == 0 {
                        let shadow = model.evaluate(&proposal);
                        if shadow.log_likelihood > FAILED_LOG_LIKELIHOOD {
                            out.shadow_pairs.push((shadow.log_likelihood, local));
                        }
                    }
                    (local, Provenance::Pseudo, None, None)
                }
                _ => {
                    let ev = model.evaluate(&proposal);
                    out.true_evaluations += 1;
                    self.collect(&mut out, &proposal, ev.log_likelihood);
                    (ev.log_likelihood, Provenance::True, ev.rmse_elev, ev.rmse_sed)
                }
            };

            let accepted = metropolis_accept(ll, chain.log_likelihood, self.temperature, &mut self.acceptance_rng);
            let chain = self.chain.as_mut().expect("initialized above");
            if accepted {
                chain.theta = proposal;
                chain.log_likelihood = ll;
                chain.provenance = provenance;
                chain.rmse_elev = rmse_elev;
                chain.rmse_sed = rmse_sed;
                self.accepted += 1;
            }
            chain.ring.push(chain.log_likelihood);
            self.proposer.record(&chain.theta);
            self.records.push(SampleRecord {
                sample: self.samples_done,
                theta: chain.theta.clone(),
                log_likelihood: chain.log_likelihood,
                provenance: chain.provenance,
                proposal_provenance: provenance,
                accepted,
                temperature: self.temperature,
                rmse_elev: chain.rmse_elev,
                rmse_sed: chain.rmse_sed,
            });
            self.samples_done += 1;
        }
        out.busy_seconds = started.elapsed().as_secs_f64();
        Ok(out)
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.samples_done == 0 {
            0.0
        } else {
            self.accepted as f64 / self.samples_done as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::model::GaussianModel;
    use nalgebra::DMatrix;
    use rand::Rng;

    fn gaussian() -> GaussianModel {
        let bounds = PriorBounds::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        GaussianModel::new(vec![0.0, 0.0], DMatrix::identity(2, 2) * 0.04, bounds).unwrap()
    }

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let a: u64 = stream(1, 0, Purpose::Proposal).random();
        let b: u64 = stream(1, 0, Purpose::Proposal).random();
        let c: u64 = stream(1, 1, Purpose::Proposal).random();
        let d: u64 = stream(1, 0, Purpose::Acceptance).random();
        assert_eq!(a, b);
        assert!(a != c && a != d);
    }

    #[test]
    fn advance_records_every_sample_and_collects_true_evaluations() {
        let model = gaussian();
        let cfg = EnsembleConfig { samples: 30, ..Default::default() };
        let mut r = ReplicaState::new(0, 1.5, &cfg, model.bounds(), 9);
        let ctx = SegmentContext { s_prob: 0.0, shadow_every: 20, surrogate: None };
        let first = r.advance(10, &model, &ctx).unwrap();
        assert_eq!(first.collected.len(), 11);
        assert!(first.collected.iter().all(|c| c.temperature == 1.5));
        let second = r.advance(30, &model, &ctx).unwrap();
        assert_eq!(second.true_evaluations, 20);
        assert_eq!(r.records.len(), 30);
        assert!(r.records.iter().enumerate().all(|(i, s)| s.sample == i && s.provenance == Provenance::True));
        assert_eq!(r.records.iter().filter(|s| s.accepted).count(), r.accepted);
    }

    #[test]
    fn ring_tracks_chain_likelihood() {
        let model = gaussian();
        let cfg = EnsembleConfig::default();
        let mut r = ReplicaState::new(2, 1.0, &cfg, model.bounds(), 4);
        r.advance(7, &model, &SegmentContext { s_prob: 0.0, shadow_every: 20, surrogate: None }).unwrap();
        let ring: Vec<f64> = r.chain.as_ref().unwrap().ring.values().collect();
        let last: Vec<f64> = r.records[4..].iter().map(|s| s.log_likelihood).collect();
        assert_eq!(ring, last);
    }
}
