//! ROC points and accuracy on the most confident users.

use appdemog::eval::{confidence_coverage, kfold_cv, roc_auc};
use appdemog::synth::{generate, SynthConfig};
use appdemog::{Attribute, TrainConfig};

fn main() -> appdemog::Result<()> {
    let data = generate(&SynthConfig::preset("small")?, 4)?;
    let labeled = data.dataset.balanced_labels(Attribute::Gender, 0)?;
    let cv = kfold_cv(&data.dataset.matrix, &labeled, 10, &TrainConfig::default(), 1)?;

    let roc = roc_auc(&cv.scores, &cv.labels)?;
    println!("auc {:.4} over {} points", roc.auc, roc.points.len());
    let step = (roc.points.len() / 8).max(1);
    for p in roc.points.iter().step_by(step) {
        println!("  fpr {:.3}  tpr {:.3}", p.fpr, p.tpr);
    }
    for coverage in [0.1, 0.25, 0.5, 1.0] {
        let acc = confidence_coverage(&cv.scores, &cv.labels, coverage)?;
        println!("most confident {:>3.0}%: accuracy {acc:.3}", coverage * 100.0);
    }
    Ok(())
}
