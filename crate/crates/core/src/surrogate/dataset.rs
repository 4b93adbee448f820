//! Training data fused from all replicas and the normalization that maps it to `[0, 1]`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::FAILED_LOG_LIKELIHOOD;
use crate::proposals::PriorBounds;

/// Where a chain's log-likelihood value came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    True,
    Pseudo,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::True => "true",
            Provenance::Pseudo => "pseudo",
        }
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "true" => Ok(Provenance::True),
            "pseudo" => Ok(Provenance::Pseudo),
            other => Err(Error::Parse(format!("unknown provenance `{other}`"))),
        }
    }
}

/// A sample shipped from a replica to the manager. The likelihood is the
/// tempered value `L / T` the replica worked with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollectedSample {
    pub theta: Vec<f64>,
    pub tempered_log_likelihood: f64,
    pub temperature: f64,
    pub provenance: Provenance,
}

fn is_sentinel(ll: f64) -> bool {
    !ll.is_finite() || ll <= FAILED_LOG_LIKELIHOOD
}

/// Parameter box from the priors plus the running log-likelihood range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub ll_min: Option<f64>,
    pub ll_max: Option<f64>,
}

impl NormalizationSpec {
    pub fn new(bounds: &PriorBounds) -> Self {
        Self { lower: bounds.lower().to_vec(), upper: bounds.upper().to_vec(), ll_min: None, ll_max: None }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Widens the likelihood range. Sentinel values are ignored.
    pub fn observe(&mut self, ll: f64) {
        if is_sentinel(ll) {
            return;
        }
        self.ll_min = Some(self.ll_min.map_or(ll, |m| m.min(ll)));
        self.ll_max = Some(self.ll_max.map_or(ll, |m| m.max(ll)));
    }

    pub fn range(&self) -> Option<(f64, f64)> {
        Some((self.ll_min?, self.ll_max?))
    }

    pub fn normalize_theta(&self, theta: &[f64]) -> Vec<f64> {
        theta
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&x, (&a, &b))| (x - a) / (b - a))
            .collect()
    }

    /// Maps `[ll_min, ll_max]` onto `[0, 1]`. A degenerate range maps to 1.
    pub fn normalize_ll(&self, ll: f64) -> Result<f64> {
        let (lo, hi) = self.range().ok_or(Error::EmptyDataset)?;
        if hi > lo {
            Ok((ll - lo) / (hi - lo))
        } else {
            Ok(1.0)
        }
    }

    pub fn denormalize_ll(&self, y: f64) -> Result<f64> {
        let (lo, hi) = self.range().ok_or(Error::SurrogateNotReady)?;
        Ok(lo + y * (hi - lo))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub interval: usize,
    pub theta: Vec<f64>,
    /// Temperature-corrected (untempered) log-likelihood.
    pub log_likelihood: f64,
    pub temperature: f64,
    pub provenance: Provenance,
}

/// Append-only store of true-model evaluations. Raw values are kept and
/// normalized on demand with the current [`NormalizationSpec`], so every
/// normalized target lies in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateDataset {
    rows: Vec<DatasetRow>,
    spec: NormalizationSpec,
    intervals: usize,
}

impl SurrogateDataset {
    pub fn new(bounds: &PriorBounds) -> Self {
        Self { rows: Vec::new(), spec: NormalizationSpec::new(bounds), intervals: 0 }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[DatasetRow] {
        &self.rows
    }

    pub fn spec(&self) -> &NormalizationSpec {
        &self.spec
    }

    pub fn input_dim(&self) -> usize {
        self.spec.dim()
    }

    /// Number of intervals collected so far.
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Fuses one surrogate interval's worth of replica samples. Pseudo-likelihood
    /// samples and failed simulations are dropped. Returns the number of rows added.
    pub fn collect_interval(&mut self, batch: &[CollectedSample]) -> Result<usize> {
        let interval = self.intervals;
        let before = self.rows.len();
        for s in batch {
            if s.theta.len() != self.spec.dim() {
                return Err(Error::DimensionMismatch(format!("sample with {} parameters, expected {}", s.theta.len(), self.spec.dim())));
            }
            if s.provenance != Provenance::True || is_sentinel(s.tempered_log_likelihood) {
                continue;
            }
            let ll = s.tempered_log_likelihood * s.temperature;
            self.spec.observe(ll);
            self.rows.push(DatasetRow {
                interval,
                theta: s.theta.clone(),
                log_likelihood: ll,
                temperature: s.temperature,
                provenance: s.provenance,
            });
        }
        self.intervals += 1;
        Ok(self.rows.len() - before)
    }

    /// Indices of rows collected in the most recent interval.
    pub fn newest_rows(&self) -> Vec<usize> {
        match self.intervals.checked_sub(1) {
            Some(last) => (0..self.rows.len()).filter(|&i| self.rows[i].interval == last).collect(),
            None => Vec::new(),
        }
    }

    pub fn all_rows(&self) -> Vec<usize> {
        (0..self.rows.len()).collect()
    }

    /// Normalized `(inputs, targets)` for the given rows.
    pub fn normalized(&self, indices: &[usize]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let mut xs = Vec::with_capacity(indices.len());
        let mut ys = Vec::with_capacity(indices.len());
        for &i in indices {
            let row = &self.rows[i];
            xs.push(self.spec.normalize_theta(&row.theta));
            ys.push(self.spec.normalize_ll(row.log_likelihood)?);
        }
        Ok((xs, ys))
    }

    /// CSV with columns `interval,theta_0..,log_likelihood,temperature,provenance`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["interval".to_string()];
        header.extend((0..self.spec.dim()).map(|j| format!("theta_{j}")));
        header.extend(["log_likelihood".into(), "temperature".into(), "provenance".into()]);
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.interval.to_string()];
            rec.extend(r.theta.iter().map(|x| x.to_string()));
            rec.extend([r.log_likelihood.to_string(), r.temperature.to_string(), r.provenance.as_str().to_string()]);
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a file produced by [`write_csv`](Self::write_csv). Parameter
    /// normalization uses `bounds`; the likelihood range is rebuilt from the rows.
    pub fn read_csv<R: Read>(input: R, bounds: &PriorBounds) -> Result<Self> {
        let mut ds = Self::new(bounds);
        let dim = bounds.dim();
        let mut reader = csv::Reader::from_reader(input);
        let width = reader.headers()?.len();
        if width != dim + 4 {
            return Err(Error::DimensionMismatch(format!("dataset has {width} columns, expected {}", dim + 4)));
        }
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("`{s}`: {e}")));
        for rec in reader.records() {
            let rec = rec?;
            let interval = rec[0].trim().parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?;
            let theta = (1..=dim).map(|k| parse(&rec[k])).collect::<Result<Vec<_>>>()?;
            let ll = parse(&rec[dim + 1])?;
            let temperature = parse(&rec[dim + 2])?;
            let provenance: Provenance = rec[dim + 3].trim().parse()?;
            if provenance != Provenance::True || is_sentinel(ll) {
                continue;
            }
            ds.spec.observe(ll);
            ds.intervals = ds.intervals.max(interval + 1);
            ds.rows.push(DatasetRow { interval, theta, log_likelihood: ll, temperature, provenance });
        }
        Ok(ds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn bounds() -> PriorBounds {
        PriorBounds::new(vec![0.0, -1.0], vec![2.0, 1.0]).unwrap()
    }

    fn sample(theta: Vec<f64>, ll: f64, t: f64, provenance: Provenance) -> CollectedSample {
        CollectedSample { theta, tempered_log_likelihood: ll / t, temperature: t, provenance }
    }

    #[test]
    fn lower_bounds_normalize_to_zero() {
        let spec = NormalizationSpec::new(&bounds());
        assert_eq!(spec.normalize_theta(&[0.0, -1.0]), vec![0.0, 0.0]);
        assert_eq!(spec.normalize_theta(&[2.0, 1.0]), vec![1.0, 1.0]);
    }

    #[test]
    fn maximum_likelihood_maps_to_one() {
        let mut ds = SurrogateDataset::new(&bounds());
        ds.collect_interval(&[sample(vec![1.0, 0.0], -50.0, 1.0, Provenance::True), sample(vec![0.5, 0.0], -10.0, 1.0, Provenance::True)])
            .unwrap();
        let (_, ys) = ds.normalized(&ds.all_rows()).unwrap();
        assert_eq!(ys, vec![0.0, 1.0]);
    }

    #[test]
    fn temperature_correction_restores_likelihood() {
        let mut ds = SurrogateDataset::new(&bounds());
        let s = CollectedSample { theta: vec![1.0, 0.0], tempered_log_likelihood: -30.0, temperature: 2.0, provenance: Provenance::True };
        ds.collect_interval(&[s]).unwrap();
        assert_eq!(ds.rows()[0].log_likelihood, -60.0);
    }

    #[test]
    fn two_replicas_contribute_all_rows() {
        let mut ds = SurrogateDataset::new(&bounds());
        let psi = 7;
        let batch: Vec<_> = (0..2 * psi)
            .map(|i| sample(vec![0.1 * (i % 10) as f64, 0.0], -(i as f64), if i < psi { 1.0 } else { 2.0 }, Provenance::True))
            .collect();
        assert_eq!(ds.collect_interval(&batch).unwrap(), 2 * psi);
        assert_eq!(ds.len(), 2 * psi);
    }

    #[test]
    fn pseudo_and_failed_samples_are_dropped() {
        let mut ds = SurrogateDataset::new(&bounds());
        let added = ds
            .collect_interval(&[
                sample(vec![1.0, 0.0], -5.0, 1.0, Provenance::Pseudo),
                sample(vec![1.0, 0.0], FAILED_LOG_LIKELIHOOD, 1.0, Provenance::True),
                sample(vec![1.0, 0.0], -7.0, 1.0, Provenance::True),
            ])
            .unwrap();
        assert_eq!(added, 1);
        assert!(ds.rows().iter().all(|r| r.provenance == Provenance::True));
        assert_eq!(ds.spec().range(), Some((-7.0, -7.0)));
    }

    #[test]
    fn newest_rows_track_intervals() {
        let mut ds = SurrogateDataset::new(&bounds());
        assert!(ds.newest_rows().is_empty());
        ds.collect_interval(&[sample(vec![1.0, 0.0], -1.0, 1.0, Provenance::True)]).unwrap();
        ds.collect_interval(&[sample(vec![1.0, 0.0], -2.0, 1.0, Provenance::True), sample(vec![1.0, 0.5], -3.0, 1.0, Provenance::True)])
            .unwrap();
        assert_eq!(ds.newest_rows(), vec![1, 2]);
        assert_eq!(ds.intervals(), 2);
    }

    #[test]
    fn denormalization_arithmetic() {
        let mut spec = NormalizationSpec::new(&bounds());
        assert!(matches!(spec.denormalize_ll(0.5), Err(Error::SurrogateNotReady)));
        spec.observe(-1000.0);
        spec.observe(0.0);
        spec.observe(FAILED_LOG_LIKELIHOOD);
        assert_eq!(spec.denormalize_ll(0.5).unwrap(), -500.0);
        assert_relative_eq!(spec.denormalize_ll(spec.normalize_ll(-123.4).unwrap()).unwrap(), -123.4, epsilon = 1e-9);
    }

    #[test]
    fn csv_round_trip() {
        let mut ds = SurrogateDataset::new(&bounds());
        ds.collect_interval(&[sample(vec![1.25, -0.5], -3.5, 1.0, Provenance::True)]).unwrap();
        ds.collect_interval(&[sample(vec![0.5, 0.75], -1.5, 2.0, Provenance::True)]).unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let back = SurrogateDataset::read_csv(buf.as_slice(), &bounds()).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn dimension_checked() {
        let mut ds = SurrogateDataset::new(&bounds());
        assert!(ds.collect_interval(&[sample(vec![1.0], -1.0, 1.0, Provenance::True)]).is_err());
    }
}
