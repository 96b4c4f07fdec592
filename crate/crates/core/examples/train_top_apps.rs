//! Fit one model and list the apps that push hardest either way.

use appdemog::logreg::{top_coefficients, train};
use appdemog::synth::{generate, SynthConfig};
use appdemog::{Attribute, FeatureMatrix, TrainConfig};

fn main() -> appdemog::Result<()> {
    let data = generate(&SynthConfig::preset("small")?, 5)?;
    let ds = &data.dataset;
    let labeled = ds.balanced_labels(Attribute::Gender, 1)?;
    let x = ds.matrix.select_rows(&labeled.row_indices)?;
    let model = train(&x, &labeled.labels, &TrainConfig::default())?;
    if let Some(c) = model.convergence {
        println!("converged={} after {} iterations", c.converged, c.iterations);
    }

    let (pos, neg) = top_coefficients(&model, &x, &labeled.labels, &ds.app_names, 5)?;
    for (title, table) in [("male", pos), ("female", neg)] {
        println!("-- {title}");
        for p in table.rows {
            println!("{:<10} coef {:+.3}  share {:.2}  users {}", p.app_name, p.coefficient, p.share, p.n);
        }
    }
    Ok(())
}
