use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logreg::check_labels;
use crate::sparse::check_len;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// Scores `>= threshold` are called positive. The first point uses +∞,
    /// serialized as `null`.
    pub threshold: Option<f64>,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocReport {
    pub points: Vec<RocPoint>,
    pub auc: f64,
    pub n_positive: usize,
    pub n_negative: usize,
}

fn check_scores(scores: &[f64], labels: &[u8]) -> Result<()> {
    check_len("scores vs labels", labels.len(), scores.len())?;
    check_labels(labels)?;
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(Error::Numerical(format!("NaN score at position {i}")));
    }
    Ok(())
}

/// ROC curve with one point per distinct score and the trapezoid AUC.
///
/// Tied scores move the curve diagonally, so the area equals the
/// Mann-Whitney statistic with ties counted as ½.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<RocReport> {
    check_scores(scores, labels)?;
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::DegenerateLabels(format!(
            "ROC needs both classes, got {n_pos} positives and {n_neg} negatives"
        )));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint {
        threshold: None,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0u64, 0u64);
    // Twice the area in units of (positive, negative) pairs; stays integral.
    let mut doubled_area = 0u64;
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        let (tp_prev, fp_prev) = (tp, fp);
        while k < order.len() && scores[order[k]] == s {
            if labels[order[k]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        doubled_area += (fp - fp_prev) * (tp + tp_prev);
        points.push(RocPoint {
            threshold: Some(s),
            fpr: fp as f64 / n_neg as f64,
            tpr: tp as f64 / n_pos as f64,
        });
    }
    let auc = doubled_area as f64 / (2.0 * n_pos as f64 * n_neg as f64);
    Ok(RocReport {
        points,
        auc,
        n_positive: n_pos,
        n_negative: n_neg,
    })
}

/// Accuracy over the `ceil(coverage · n)` users whose probability is
/// farthest from ½. Probability ½ predicts positive; ties in confidence keep
/// input order.
pub fn confidence_coverage(scores: &[f64], labels: &[u8], coverage: f64) -> Result<f64> {
    check_scores(scores, labels)?;
    if scores.is_empty() {
        return Err(Error::InvalidArgument("confidence coverage of an empty set".into()));
    }
    if !(coverage > 0.0 && coverage <= 1.0) {
        return Err(Error::InvalidArgument(format!("coverage {coverage} outside (0, 1]")));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| (scores[b] - 0.5).abs().total_cmp(&(scores[a] - 0.5).abs()));
    let take = crate::dimred::min_support(coverage, scores.len()).clamp(1, scores.len());
    let correct = order[..take]
        .iter()
        .filter(|&&i| ((scores[i] >= 0.5) as u8) == labels[i])
        .count();
    Ok(correct as f64 / take as f64)
}
