//! Compare no reduction, a frequency filter, category counts and SVD.

use appdemog::cli::{dimred_scores, DimredMethod};
use appdemog::synth::{generate, SynthConfig};
use appdemog::{Attribute, TrainConfig};

fn main() -> appdemog::Result<()> {
    let data = generate(&SynthConfig::preset("small")?, 2)?;
    let labeled = data.dataset.balanced_labels(Attribute::Age, 0)?;
    let scores = dimred_scores(&data.dataset, &labeled, DimredMethod::All, 10, 48, 0.1, &TrainConfig::default(), 7)?;
    for s in scores {
        println!("{:<9} {:>5} features  accuracy {:.3}  auc {:.3}", s.method, s.features, s.mean_accuracy, s.auc);
    }
    Ok(())
}
