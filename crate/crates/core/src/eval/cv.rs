use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::roc::roc_auc;
use crate::error::{Error, Result};
use crate::logreg::{train, TrainConfig};
use crate::rng;
use crate::sampling::LabeledSubset;
use crate::sparse::FeatureMatrix;

/// Out-of-fold evaluation of one labeled problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub fold_accuracies: Vec<f64>,
    pub fold_sizes: Vec<usize>,
    /// Mean of the per-fold accuracies.
    pub mean_accuracy: f64,
    /// Pooled over all out-of-fold scores.
    pub auc: f64,
    /// Dataset rows in the order of the input subset.
    pub rows: Vec<usize>,
    pub labels: Vec<u8>,
    /// Out-of-fold positive-class probability of each row.
    pub scores: Vec<f64>,
    pub folds: Vec<usize>,
    /// Folds whose model met the gradient tolerance.
    pub converged_folds: usize,
}

impl CvReport {
    /// Whether each out-of-fold prediction was right.
    pub fn correct(&self) -> Vec<bool> {
        self.scores
            .iter()
            .zip(&self.labels)
            .map(|(&s, &l)| ((s >= 0.5) as u8) == l)
            .collect()
    }

    pub fn pooled_accuracy(&self) -> f64 {
        let c = self.correct();
        c.iter().filter(|&&b| b).count() as f64 / c.len() as f64
    }
}

/// Stratified, seed-shuffled fold of every position in `labels`.
///
/// Each class is shuffled and dealt round-robin; the deal continues from
/// one class to the next so fold sizes differ by at most one.
pub fn stratified_folds(labels: &[u8], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k-fold needs k >= 2, got {k}")));
    }
    if labels.len() < k {
        return Err(Error::InsufficientPopulation(format!(
            "{} users cannot fill {k} folds",
            labels.len()
        )));
    }
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 1).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] != 1).collect();
    if pos.len() < 2 || neg.len() < 2 {
        return Err(Error::InsufficientPopulation(format!(
            "class too small to stratify: {} positives, {} negatives",
            pos.len(),
            neg.len()
        )));
    }
    let mut rng = rng::substream(seed, 0);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut folds = vec![0; labels.len()];
    for (c, &i) in pos.iter().chain(&neg).enumerate() {
        folds[i] = c % k;
    }
    Ok(folds)
}

/// k-fold cross-validation of `labeled` over the rows of `x`.
///
/// Folds train in parallel; the result does not depend on the thread count.
pub fn kfold_cv<M: FeatureMatrix>(
    x: &M,
    labeled: &LabeledSubset,
    k: usize,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<CvReport> {
    cfg.validate()?;
    if let Some(&r) = labeled.row_indices.iter().find(|&&r| r >= x.n_rows()) {
        return Err(Error::IndexOutOfRange(format!("labeled row {r} beyond {} matrix rows", x.n_rows())));
    }
    let folds = stratified_folds(&labeled.labels, k, seed)?;

    let per_fold: Vec<(Vec<usize>, Vec<f64>, bool)> = (0..k)
        .into_par_iter()
        .map(|f| -> Result<_> {
            let (test, train_pos): (Vec<usize>, Vec<usize>) = (0..labeled.len()).partition(|&p| folds[p] == f);
            let train_rows: Vec<usize> = train_pos.iter().map(|&p| labeled.row_indices[p]).collect();
            let train_y: Vec<u8> = train_pos.iter().map(|&p| labeled.labels[p]).collect();
            let test_rows: Vec<usize> = test.iter().map(|&p| labeled.row_indices[p]).collect();
            let model = train(&x.select_rows(&train_rows)?, &train_y, cfg)?;
            let scores = model.predict_proba(&x.select_rows(&test_rows)?)?;
            let converged = model.convergence.is_some_and(|c| c.converged);
            Ok((test, scores, converged))
        })
        .collect::<Result<_>>()?;

    let mut scores = vec![f64::NAN; labeled.len()];
    let mut fold_accuracies = Vec::with_capacity(k);
    let mut fold_sizes = Vec::with_capacity(k);
    let mut converged_folds = 0;
    for (test, fold_scores, converged) in per_fold {
        let mut correct = 0;
        for (&p, &s) in test.iter().zip(&fold_scores) {
            scores[p] = s;
            correct += (((s >= 0.5) as u8) == labeled.labels[p]) as usize;
        }
        fold_accuracies.push(correct as f64 / test.len() as f64);
        fold_sizes.push(test.len());
        converged_folds += converged as usize;
    }
    let mean_accuracy = fold_accuracies.iter().sum::<f64>() / k as f64;
    let auc = roc_auc(&scores, &labeled.labels)?.auc;

    Ok(CvReport {
        k,
        fold_accuracies,
        fold_sizes,
        mean_accuracy,
        auc,
        rows: labeled.row_indices.clone(),
        labels: labeled.labels.clone(),
        scores,
        folds,
        converged_folds,
    })
}
