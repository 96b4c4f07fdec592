//! Stratified 10-fold CV for every attribute, next to the Bayes rate.

use appdemog::eval::kfold_cv;
use appdemog::synth::{bayes_accuracy, generate, SynthConfig};
use appdemog::{Attribute, TrainConfig};

fn main() -> appdemog::Result<()> {
    let data = generate(&SynthConfig::preset("small")?, 8)?;
    for attribute in Attribute::ALL {
        let labeled = data.dataset.balanced_labels(attribute, 1)?;
        let cv = kfold_cv(&data.dataset.matrix, &labeled, 10, &TrainConfig::default(), 2)?;
        let bayes = bayes_accuracy(&data.truth, attribute, 20_000, 3)?;
        println!(
            "{:<9} n={:<4} accuracy {:.3}  auc {:.3}  bayes {:.3}",
            attribute.name(),
            labeled.len(),
            cv.mean_accuracy,
            cv.auc,
            bayes.accuracy
        );
    }
    Ok(())
}
