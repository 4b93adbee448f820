//! Convergence and accuracy metrics over finished chains.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lem::{GridTopography, SedimentRecord};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsrfReport {
    pub labels: Vec<String>,
    pub r_scores: Vec<f64>,
    pub mean_r_score: f64,
    pub chains: usize,
    pub length: usize,
}

/// Gelman-Rubin potential scale reduction for one scalar quantity.
/// `chains` holds `C >= 2` equally long series of `L >= 4` draws.
pub fn psrf_scalar<T: Real>(chains: &[Vec<T>]) -> Result<T> {
    let c = chains.len();
    if c < 2 {
        return Err(Error::InvalidConfig(format!("PSRF needs at least 2 chains, got {c}")));
    }
    let l = chains[0].len();
    if let Some(bad) = chains.iter().find(|ch| ch.len() != l) {
        return Err(Error::LengthMismatch(l, bad.len()));
    }
    if l < 4 {
        return Err(Error::InvalidConfig(format!("PSRF needs at least 4 draws per chain, got {l}")));
    }
    let lf = T::lit(l as f64);
    let cf = T::lit(c as f64);
    let mut means = Vec::with_capacity(c);
    let mut w = T::zero();
    for ch in chains {
        let m = ch.iter().fold(T::zero(), |a, &x| a + x) / lf;
        let s2 = ch.iter().fold(T::zero(), |a, &x| a + (x - m) * (x - m)) / (lf - T::one());
        means.push(m);
        w += s2;
    }
    w /= cf;
    if !(w > T::zero()) {
        return Err(Error::DegenerateChains(0));
    }
    let grand = means.iter().fold(T::zero(), |a, &m| a + m) / cf;
    let b_over_l = means.iter().fold(T::zero(), |a, &m| a + (m - grand) * (m - grand)) / (cf - T::one());
    let v_hat = (T::one() - T::one() / lf) * w + b_over_l;
    Ok((v_hat / w).sqrt())
}

/// Per-parameter PSRF. `chains[c][l]` is the parameter vector of draw `l` in chain `c`.
pub fn psrf(chains: &[Vec<Vec<f64>>], labels: &[String]) -> Result<PsrfReport> {
    let dim = labels.len();
    let mut r_scores = Vec::with_capacity(dim);
    for j in 0..dim {
        let series: Vec<Vec<f64>> = chains
            .iter()
            .map(|ch| {
                ch.iter()
                    .map(|theta| theta.get(j).copied().ok_or_else(|| Error::DimensionMismatch(format!("draw without parameter {j}"))))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        let r = psrf_scalar(&series).map_err(|e| match e {
            Error::DegenerateChains(_) => Error::DegenerateChains(j),
            other => other,
        })?;
        r_scores.push(r);
    }
    let mean_r_score = r_scores.iter().sum::<f64>() / dim.max(1) as f64;
    Ok(PsrfReport {
        labels: labels.to_vec(),
        r_scores,
        mean_r_score,
        chains: chains.len(),
        length: chains.first().map_or(0, Vec::len),
    })
}

/// Root mean squared difference of two equally long series.
pub fn rmse<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::DimensionMismatch("RMSE of empty series".into()));
    }
    let sum = a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y));
    Ok((sum / T::lit(a.len() as f64)).sqrt())
}

pub fn rmse_elev<T: Real>(pred: &GridTopography<T>, truth: &GridTopography<T>) -> Result<T> {
    pred.check_shape(truth)?;
    rmse(pred.elevations(), truth.elevations())
}

pub fn rmse_sed<T: Real>(pred: &SedimentRecord<T>, truth: &SedimentRecord<T>) -> Result<T> {
    pred.check_shape(truth)?;
    rmse(&pred.values, &truth.values)
}

/// Surrogate accuracy over `(true, pseudo)` log-likelihood pairs.
pub fn rmse_sur<T: Real>(true_logliks: &[T], pseudo_logliks: &[T]) -> Result<T> {
    rmse(true_logliks, pseudo_logliks)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionPoint {
    pub row: usize,
    pub col: usize,
    pub truth: f64,
    pub mean: f64,
    pub std: f64,
}

/// Ground truth against the posterior predictive mean and spread along one grid row.
pub fn cross_section(truth: &GridTopography<f64>, predictions: &[GridTopography<f64>], row: usize) -> Result<Vec<CrossSectionPoint>> {
    if row >= truth.rows() {
        return Err(Error::InvalidConfig(format!("row {row} outside a grid with {} rows", truth.rows())));
    }
    if predictions.is_empty() {
        return Err(Error::EmptyPosterior);
    }
    for p in predictions {
        truth.check_shape(p)?;
    }
    let n = predictions.len() as f64;
    Ok((0..truth.cols())
        .map(|col| {
            let mean = predictions.iter().map(|p| p.get(row, col)).sum::<f64>() / n;
            let var = predictions.iter().map(|p| (p.get(row, col) - mean).powi(2)).sum::<f64>() / n;
            CrossSectionPoint { row, col, truth: truth.get(row, col), mean, std: var.sqrt() }
        })
        .collect())
}

pub fn write_cross_section_csv<W: Write>(points: &[CrossSectionPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn copies_give_sqrt_one_minus_inverse_length() {
        let ch = vec![1.0, 2.0, 4.0, 3.0, 0.5];
        let r = psrf_scalar(&[ch.clone(), ch.clone(), ch]).unwrap();
        assert_relative_eq!(r, (1.0f64 - 1.0 / 5.0).sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn constant_chains_are_degenerate() {
        let err = psrf(&[vec![vec![1.0, 0.0]; 5], vec![vec![2.0, 0.0]; 5]], &["a".into(), "b".into()]).unwrap_err();
        assert!(matches!(err, Error::DegenerateChains(0)));
    }

    #[test]
    fn separated_chains_score_above_one() {
        let a: Vec<f64> = (0..50).map(|i| (i % 7) as f64).collect();
        let b: Vec<f64> = a.iter().map(|x| x + 10.0).collect();
        assert!(psrf_scalar(&[a, b]).unwrap() > 2.0);
    }

    #[test]
    fn psrf_preconditions() {
        assert!(psrf_scalar(&[vec![1.0, 2.0, 3.0, 4.0]]).is_err());
        assert!(psrf_scalar(&[vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]]).is_err());
        assert!(matches!(psrf_scalar(&[vec![1.0, 2.0, 3.0, 4.0], vec![1.0, 2.0, 3.0]]), Err(Error::LengthMismatch(4, 3))));
    }

    #[test]
    fn rmse_examples() {
        let a = GridTopography::new(2, 2, 1.0, 0.0, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(rmse_elev(&a, &a).unwrap(), 0.0);
        let b = GridTopography::new(2, 2, 1.0, 0.0, vec![3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_relative_eq!(rmse_elev(&b, &a).unwrap(), 2.0, epsilon = 1e-15);
        assert_relative_eq!(rmse(&[3.0, 4.0], &[0.0, 0.0]).unwrap(), 12.5f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(rmse(&[3.0, 4.0], &[0.0, 0.0]).unwrap(), 3.5355, epsilon = 1e-4);

        let s = SedimentRecord::from_rows(&[vec![5.0]]).unwrap();
        let z = SedimentRecord::from_rows(&[vec![0.0]]).unwrap();
        assert_eq!(rmse_sed(&s, &z).unwrap(), 5.0);
        let ones = SedimentRecord::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(rmse_sed(&ones, &SedimentRecord::zeros(2, 2)).unwrap(), 1.0);

        assert_eq!(rmse_sur(&[-10.0, -20.0], &[-12.0, -18.0]).unwrap(), 2.0);
        assert!(matches!(rmse_sur(&[-1.0], &[-1.0, -2.0]), Err(Error::LengthMismatch(1, 2))));
        let c = GridTopography::<f64>::flat(3, 2, 1.0, 0.0).unwrap();
        assert!(matches!(rmse_elev(&a, &c), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn cross_section_statistics() {
        let truth = GridTopography::new(2, 2, 1.0, 0.0, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let p1 = GridTopography::new(2, 2, 1.0, 0.0, vec![0.0, 0.0, 1.0, 3.0]).unwrap();
        let p2 = GridTopography::new(2, 2, 1.0, 0.0, vec![0.0, 0.0, 3.0, 5.0]).unwrap();
        let pts = cross_section(&truth, &[p1, p2], 1).unwrap();
        assert_eq!(pts[0], CrossSectionPoint { row: 1, col: 0, truth: 2.0, mean: 2.0, std: 1.0 });
        assert_eq!(pts[1], CrossSectionPoint { row: 1, col: 1, truth: 3.0, mean: 4.0, std: 1.0 });
        assert!(cross_section(&truth, &[], 0).is_err());
        let mut buf = Vec::new();
        write_cross_section_csv(&pts, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("row,col,truth,mean,std\n1,0,2.0,2.0,1.0\n"));
    }
}
