//! Accuracy as a function of training-set size, and of users' app counts.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::kfold_cv;
use crate::error::{Error, Result};
use crate::logreg::{train, TrainConfig};
use crate::rng::child_seed;
use crate::sampling::{balanced_subsample, LabeledSubset};
use crate::sparse::FeatureMatrix;

/// Bin edges used when none are given.
pub const DEFAULT_BIN_EDGES: [usize; 9] = [0, 20, 35, 50, 75, 100, 150, 250, 10_000];

/// How a subsample is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Train on the subsample, test on the rest of the pool.
    Holdout,
    /// k-fold cross-validation inside the subsample.
    KFold(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dispersion {
    /// Population standard deviation over repetitions.
    StdDev,
    /// `sqrt(p(1−p)/n)`.
    StdError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Training size, or a bin's lower edge.
    pub x: f64,
    /// A bin's exclusive upper edge.
    pub x_upper: Option<f64>,
    /// `None` for an empty bin.
    pub mean: Option<f64>,
    pub dispersion: Option<f64>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveReport {
    pub dispersion: Dispersion,
    pub points: Vec<CurvePoint>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn score_subsample<M: FeatureMatrix>(
    x: &M,
    pool: &LabeledSubset,
    size: usize,
    protocol: Protocol,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<f64> {
    let sub = balanced_subsample(pool, size, seed)?;
    match protocol {
        Protocol::KFold(k) => Ok(kfold_cv(x, &sub, k, cfg, seed)?.mean_accuracy),
        Protocol::Holdout => {
            let chosen: HashSet<usize> = sub.row_indices.iter().copied().collect();
            let rest: Vec<usize> = (0..pool.len()).filter(|&p| !chosen.contains(&pool.row_indices[p])).collect();
            if rest.is_empty() {
                return Err(Error::InsufficientPopulation(format!(
                    "training size {size} leaves no held-out users in a pool of {}",
                    pool.len()
                )));
            }
            let test = pool.pick(&rest);
            let model = train(&x.select_rows(&sub.row_indices)?, &sub.labels, cfg)?;
            let pred = model.predict(&x.select_rows(&test.row_indices)?)?;
            let correct = pred.iter().zip(&test.labels).filter(|(p, l)| p == l).count();
            Ok(correct as f64 / test.len() as f64)
        }
    }
}

/// For each size, `reps` balanced subsamples scored under `protocol`;
/// reports mean and standard deviation of the accuracies.
///
/// `pool` is the balanced labeled set. Repetition `r` at size `s` uses a
/// seed derived from `(seed, s, r)`, so results are independent of which
/// other sizes are requested and of the thread count.
pub fn learning_curve<M: FeatureMatrix>(
    x: &M,
    pool: &LabeledSubset,
    sizes: &[usize],
    reps: usize,
    protocol: Protocol,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<CurveReport> {
    cfg.validate()?;
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be >= 1".into()));
    }
    for &s in sizes {
        if s == 0 || s % 2 != 0 {
            return Err(Error::InvalidArgument(format!("training size {s} must be even and positive")));
        }
        let limit = match protocol {
            Protocol::Holdout => pool.len().saturating_sub(1),
            Protocol::KFold(_) => pool.len(),
        };
        if s > limit {
            return Err(Error::InsufficientPopulation(format!("size {s} exceeds the pool of {}", pool.len())));
        }
    }

    let tasks: Vec<(usize, usize)> = (0..sizes.len()).flat_map(|i| (0..reps).map(move |r| (i, r))).collect();
    let accuracies: Vec<f64> = tasks
        .par_iter()
        .map(|&(i, r)| {
            let s = sizes[i];
            let task_seed = child_seed(child_seed(seed, s as u64), r as u64);
            score_subsample(x, pool, s, protocol, cfg, task_seed)
        })
        .collect::<Result<_>>()?;

    let points = sizes
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let (mean, std) = mean_std(&accuracies[i * reps..(i + 1) * reps]);
            CurvePoint {
                x: s as f64,
                x_upper: None,
                mean: Some(mean),
                dispersion: Some(std),
                count: reps,
            }
        })
        .collect();
    Ok(CurveReport {
        dispersion: Dispersion::StdDev,
        points,
    })
}

/// `reps` balanced subsamples of 174 users, each scored by 2-fold CV.
pub fn benchmark_174<M: FeatureMatrix>(
    x: &M,
    pool: &LabeledSubset,
    reps: usize,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<CurveReport> {
    if pool.n_positive() < 87 || pool.n_negative() < 87 {
        return Err(Error::InsufficientPopulation(format!(
            "benchmark needs 87 users per class, have {} and {}",
            pool.n_positive(),
            pool.n_negative()
        )));
    }
    learning_curve(x, pool, &[174], reps, Protocol::KFold(2), cfg, seed)
}

/// Accuracy per app-count bin `[edges[i], edges[i+1])` with its standard
/// error `sqrt(p(1−p)/n)`. Empty bins report `n = 0` and no accuracy.
pub fn app_count_bins(per_user: &[(usize, bool)], edges: &[usize]) -> Result<CurveReport> {
    if edges.len() < 2 || edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!("bin edges {edges:?} must be strictly increasing")));
    }
    let mut n = vec![0usize; edges.len() - 1];
    let mut correct = vec![0usize; edges.len() - 1];
    for &(count, ok) in per_user {
        let bin = edges
            .windows(2)
            .position(|w| w[0] <= count && count < w[1])
            .ok_or_else(|| Error::InvalidArgument(format!("app count {count} falls outside bins {edges:?}")))?;
        n[bin] += 1;
        correct[bin] += ok as usize;
    }
    let points = (0..n.len())
        .map(|b| {
            let (mean, se) = if n[b] == 0 {
                (None, None)
            } else {
                let p = correct[b] as f64 / n[b] as f64;
                (Some(p), Some(standard_error(p, n[b])))
            };
            CurvePoint {
                x: edges[b] as f64,
                x_upper: Some(edges[b + 1] as f64),
                mean,
                dispersion: se,
                count: n[b],
            }
        })
        .collect();
    Ok(CurveReport {
        dispersion: Dispersion::StdError,
        points,
    })
}

/// Standard error of a proportion.
pub fn standard_error(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Correctness flags of users whose app count lies in `[lo, hi)`.
pub fn flags_in_range(per_user: &[(usize, bool)], lo: usize, hi: usize) -> Vec<bool> {
    per_user
        .iter()
        .filter(|(c, _)| (lo..hi).contains(c))
        .map(|&(_, ok)| ok)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn se_examples() {
        assert_eq!(standard_error(0.5, 100), 0.05);
        assert_eq!(standard_error(1.0, 7), 0.0);
    }

    #[test]
    fn bins_count_everyone_and_report_empty_bins() {
        let users: Vec<(usize, bool)> = (0..200).map(|i| (i % 120, i % 3 != 0)).collect();
        let r = app_count_bins(&users, &DEFAULT_BIN_EDGES).unwrap();
        assert_eq!(r.points.len(), 8);
        assert_eq!(r.points.iter().map(|p| p.count).sum::<usize>(), 200);
        let empty = &r.points[6];
        assert_eq!((empty.x, empty.x_upper, empty.count, empty.mean), (150.0, Some(250.0), 0, None));
        for p in r.points.iter().filter(|p| p.count > 0) {
            let m = p.mean.unwrap();
            assert_eq!(p.dispersion.unwrap(), (m * (1.0 - m) / p.count as f64).sqrt());
        }
    }

    #[test]
    fn bins_reject_bad_input() {
        assert!(app_count_bins(&[(5, true)], &[0, 0, 10]).is_err());
        assert!(app_count_bins(&[(10, true)], &[0, 10]).is_err());
        assert!(app_count_bins(&[], &[3]).is_err());
    }

    #[test]
    fn range_flags() {
        let users = [(10, true), (60, false), (149, true), (150, false)];
        assert_eq!(flags_in_range(&users, 50, 150), vec![false, true]);
        assert_eq!(flags_in_range(&users, 150, usize::MAX), vec![false]);
    }
}
