//! Accuracy against training-set size.

use appdemog::eval::{learning_curve, Protocol};
use appdemog::synth::{generate, SynthConfig};
use appdemog::{Attribute, TrainConfig};

fn main() -> appdemog::Result<()> {
    let data = generate(&SynthConfig::preset("small")?, 6)?;
    let pool = data.dataset.balanced_labels(Attribute::Gender, 0)?;
    let curve = learning_curve(
        &data.dataset.matrix,
        &pool,
        &[50, 100, 200, 400],
        20,
        Protocol::Holdout,
        &TrainConfig::default(),
        9,
    )?;
    for p in curve.points {
        println!("{:>4} users: {:.3} ± {:.3}", p.x, p.mean.unwrap_or(f64::NAN), p.dispersion.unwrap_or(f64::NAN));
    }
    Ok(())
}
