//! Repeated 2-fold CV on 174-user balanced subsamples, per attribute.

use appdemog::eval::benchmark_174;
use appdemog::synth::{generate, SynthConfig};
use appdemog::{Attribute, TrainConfig};

fn main() -> appdemog::Result<()> {
    let data = generate(&SynthConfig::preset("small")?, 3)?;
    for attribute in Attribute::ALL {
        let pool = data.dataset.balanced_labels(attribute, 0)?;
        let r = benchmark_174(&data.dataset.matrix, &pool, 20, &TrainConfig::default(), 1)?;
        let p = &r.points[0];
        println!("{:<9} {:.3} ± {:.3}", attribute.name(), p.mean.unwrap(), p.dispersion.unwrap());
    }
    Ok(())
}
