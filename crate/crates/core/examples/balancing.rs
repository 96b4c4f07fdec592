//! Binarize an attribute and undersample the majority class.

use appdemog::sampling::{balance, binarize};
use appdemog::synth::{generate, SynthConfig};
use appdemog::Attribute;

fn main() -> appdemog::Result<()> {
    let data = generate(&SynthConfig::preset("small")?, 11)?;
    for attribute in Attribute::ALL {
        let raw = binarize(&data.dataset.records, &attribute.default_rule())?;
        let balanced = balance(&raw, 3)?;
        println!(
            "{:<9} labeled {:>4} ({:>4} positive)  balanced {:>4}",
            attribute.name(),
            raw.len(),
            raw.n_positive(),
            balanced.len()
        );
    }
    Ok(())
}
