//! Finished-run data, on-disk layout and posterior summaries.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostics::rmse_sur;
use crate::engine::replica::SampleRecord;
use crate::error::{Error, Result};
use crate::surrogate::{Surrogate, SurrogateDataset, TrainReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapRecord {
    pub sync: usize,
    pub sample: usize,
    pub first: usize,
    pub second: usize,
    pub probability: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub phase: String,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct PosteriorChains {
    pub labels: Vec<String>,
    /// Per replica slot, one record per sample.
    pub replicas: Vec<Vec<SampleRecord>>,
    pub burn_in: usize,
    pub temperatures: Vec<f64>,
    pub swaps: Vec<SwapRecord>,
    pub timing: Vec<TimingRecord>,
    pub training_log: Vec<TrainReport>,
    pub shadow_pairs: Vec<(f64, f64)>,
    pub dataset: SurrogateDataset,
    pub surrogate: Option<Surrogate<f64>>,
    pub true_evaluations: usize,
    pub surrogate_evaluations: usize,
    pub wall_time: f64,
}

impl PosteriorChains {
    pub fn samples_per_replica(&self) -> usize {
        self.replicas.first().map_or(0, Vec::len)
    }

    /// Post-burn-in records of every replica, in replica order.
    pub fn post_burn_in(&self) -> impl Iterator<Item = &SampleRecord> + '_ {
        self.replicas.iter().flat_map(move |r| r.iter().skip(self.burn_in))
    }

    /// All post-burn-in parameter vectors pooled into one sequence.
    pub fn pooled(&self) -> Vec<Vec<f64>> {
        self.post_burn_in().map(|s| s.theta.clone()).collect()
    }

    fn timing_seconds(&self, phase: &str) -> Option<f64> {
        self.timing.iter().find(|t| t.phase == phase).map(|t| t.seconds)
    }

    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        let chains = dir.join("chains");
        fs::create_dir_all(&chains)?;
        for (i, records) in self.replicas.iter().enumerate() {
            write_chain_csv(&self.labels, records, BufWriter::new(File::create(chains.join(format!("replica_{i}.csv")))?))?;
        }
        write_serialized(&self.swaps, File::create(dir.join("swaps.csv"))?)?;
        write_serialized(&self.timing, File::create(dir.join("timing.csv"))?)?;
        write_serialized(&self.training_log, File::create(dir.join("surrogate_training.csv"))?)?;
        self.dataset.write_csv(BufWriter::new(File::create(dir.join("surrogate_dataset.csv"))?))?;
        if let Some(s) = &self.surrogate {
            s.save(dir.join("surrogate.json"))?;
        }
        let summary = RunSummary::from_chains(self)?;
        fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
        Ok(())
    }
}

fn write_serialized<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `sample,<labels..>,log_likelihood,provenance,proposal_provenance,accepted,temperature,rmse_elev,rmse_sed`.
pub fn write_chain_csv<W: Write>(labels: &[String], records: &[SampleRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["sample".to_string()];
    header.extend(labels.iter().cloned());
    header.extend(
        ["log_likelihood", "provenance", "proposal_provenance", "accepted", "temperature", "rmse_elev", "rmse_sed"].map(String::from),
    );
    w.write_record(&header)?;
    for s in records {
        let mut rec = vec![s.sample.to_string()];
        rec.extend(s.theta.iter().map(|x| x.to_string()));
        rec.extend([
            s.log_likelihood.to_string(),
            s.provenance.as_str().to_string(),
            s.proposal_provenance.as_str().to_string(),
            s.accepted.to_string(),
            s.temperature.to_string(),
            opt(s.rmse_elev),
            opt(s.rmse_sed),
        ]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_chain_csv<R: Read>(input: R) -> Result<(Vec<String>, Vec<SampleRecord>)> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.len() < 9 {
        return Err(Error::Parse(format!("chain file has {} columns", headers.len())));
    }
    let dim = headers.len() - 8;
    let labels: Vec<String> = headers.iter().skip(1).take(dim).map(String::from).collect();
    let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("`{s}`: {e}")));
    let opt_num = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let field = |k: usize| rec.get(k).unwrap_or("");
        records.push(SampleRecord {
            sample: field(0).parse().map_err(|e| Error::Parse(format!("sample index: {e}")))?,
            theta: (1..=dim).map(|k| num(field(k))).collect::<Result<_>>()?,
            log_likelihood: num(field(dim + 1))?,
            provenance: field(dim + 2).parse()?,
            proposal_provenance: field(dim + 3).parse()?,
            accepted: field(dim + 4).parse().map_err(|e| Error::Parse(format!("accepted flag: {e}")))?,
            temperature: num(field(dim + 5))?,
            rmse_elev: opt_num(field(dim + 6))?,
            rmse_sed: opt_num(field(dim + 7))?,
        });
    }
    Ok((labels, records))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterSummary {
    pub name: String,
    pub mean: f64,
    pub std: f64,
    pub q05: f64,
    pub q95: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub samples: usize,
    pub parameters: Vec<ParameterSummary>,
}

impl PosteriorSummary {
    pub fn get(&self, name: &str) -> Option<&ParameterSummary> {
        self.parameters.iter().find(|p| p.name == name)
    }
}

/// Linear interpolation between order statistics at position `p * (n - 1)`.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Mean, sample standard deviation and 5%/95% quantiles of pooled draws.
pub fn summarize_samples(labels: &[String], samples: &[Vec<f64>]) -> Result<PosteriorSummary> {
    if samples.is_empty() {
        return Err(Error::EmptyPosterior);
    }
    let n = samples.len() as f64;
    let parameters = labels
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let mut xs: Vec<f64> = samples.iter().map(|s| s[j]).collect();
            let mean = xs.iter().sum::<f64>() / n;
            let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            xs.sort_by(f64::total_cmp);
            ParameterSummary { name: name.clone(), mean, std: var.sqrt(), q05: quantile(&xs, 0.05), q95: quantile(&xs, 0.95) }
        })
        .collect();
    Ok(PosteriorSummary { samples: samples.len(), parameters })
}

/// Summary over every replica's samples from index `burn_in` on.
pub fn posterior_summary(chains: &PosteriorChains, burn_in: usize) -> Result<PosteriorSummary> {
    let samples: Vec<Vec<f64>> = chains.replicas.iter().flat_map(|r| r.iter().skip(burn_in)).map(|s| s.theta.clone()).collect();
    summarize_samples(&chains.labels, &samples)
}

fn mean_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub posterior: PosteriorSummary,
    pub replicas: usize,
    pub samples: usize,
    pub burn_in: usize,
    pub temperatures: Vec<f64>,
    /// Mean over post-burn-in chain states that carry a simulation.
    pub rmse_elev: Option<f64>,
    pub rmse_sed: Option<f64>,
    pub rmse_sur: Option<f64>,
    pub shadow_pairs: usize,
    pub acceptance_rates: Vec<f64>,
    pub swap_acceptance_rate: Option<f64>,
    pub true_evaluations: usize,
    pub surrogate_evaluations: usize,
    pub surrogate_trainings: usize,
    pub sampling_seconds: Option<f64>,
    pub wall_time: f64,
}

impl RunSummary {
    pub fn from_chains(chains: &PosteriorChains) -> Result<Self> {
        let posterior = posterior_summary(chains, chains.burn_in)?;
        let (truth, pseudo): (Vec<f64>, Vec<f64>) = chains.shadow_pairs.iter().copied().unzip();
        let rmse_sur = if truth.is_empty() { None } else { Some(rmse_sur(&truth, &pseudo)?) };
        let acceptance_rates = chains
            .replicas
            .iter()
            .map(|r| if r.is_empty() { 0.0 } else { r.iter().filter(|s| s.accepted).count() as f64 / r.len() as f64 })
            .collect();
        Ok(Self {
            posterior,
            replicas: chains.replicas.len(),
            samples: chains.samples_per_replica(),
            burn_in: chains.burn_in,
            temperatures: chains.temperatures.clone(),
            rmse_elev: mean_of(chains.post_burn_in().filter_map(|s| s.rmse_elev)),
            rmse_sed: mean_of(chains.post_burn_in().filter_map(|s| s.rmse_sed)),
            rmse_sur,
            shadow_pairs: truth.len(),
            acceptance_rates,
            swap_acceptance_rate: mean_of(chains.swaps.iter().map(|s| if s.accepted { 1.0 } else { 0.0 })),
            true_evaluations: chains.true_evaluations,
            surrogate_evaluations: chains.surrogate_evaluations,
            surrogate_trainings: chains.training_log.len(),
            sampling_seconds: chains.timing_seconds("sampling"),
            wall_time: chains.wall_time,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surrogate::Provenance;

    fn record(sample: usize, theta: Vec<f64>) -> SampleRecord {
        SampleRecord {
            sample,
            theta,
            log_likelihood: -1.5,
            provenance: Provenance::True,
            proposal_provenance: Provenance::Pseudo,
            accepted: sample % 2 == 0,
            temperature: 1.25,
            rmse_elev: (sample % 3 == 0).then_some(2.5),
            rmse_sed: None,
        }
    }

    #[test]
    fn identical_samples_have_zero_spread() {
        let s = summarize_samples(&["a".into()], &vec![vec![0.75]; 10]).unwrap();
        assert_eq!(s.parameters[0], ParameterSummary { name: "a".into(), mean: 0.75, std: 0.0, q05: 0.75, q95: 0.75 });
    }

    #[test]
    fn summary_ignores_order() {
        let xs: Vec<Vec<f64>> = (0..101).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let mut rev = xs.clone();
        rev.reverse();
        let labels = ["a".to_string(), "b".to_string()];
        assert_eq!(summarize_samples(&labels, &xs).unwrap(), summarize_samples(&labels, &rev).unwrap());
        let s = summarize_samples(&labels, &xs).unwrap();
        assert_eq!((s.parameters[0].q05, s.parameters[0].q95, s.parameters[0].mean), (5.0, 95.0, 50.0));
    }

    #[test]
    fn quantile_interpolates() {
        assert_eq!(quantile(&[0.0, 10.0], 0.05), 0.5);
        assert_eq!(quantile(&[3.0], 0.95), 3.0);
    }

    #[test]
    fn empty_posterior_is_an_error() {
        assert!(matches!(summarize_samples(&["a".into()], &[]), Err(Error::EmptyPosterior)));
    }

    #[test]
    fn chain_csv_round_trip() {
        let labels = vec!["rainfall".to_string(), "uplift".to_string()];
        let records: Vec<_> = (0..5).map(|i| record(i, vec![0.1 * i as f64, 1.0 / (i + 1) as f64])).collect();
        let mut buf = Vec::new();
        write_chain_csv(&labels, &records, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("sample,rainfall,uplift,log_likelihood,provenance,proposal_provenance,accepted,temperature,rmse_elev,rmse_sed\n"));
        let (l, back) = read_chain_csv(buf.as_slice()).unwrap();
        assert_eq!((l, back), (labels, records));
    }
}
