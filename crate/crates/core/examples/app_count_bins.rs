//! Accuracy by number of installed apps, and a one-sided Welch test
//! between two bins.

use appdemog::eval::curves::flags_in_range;
use appdemog::eval::{app_count_bins, kfold_cv, welch_t_test_flags, DEFAULT_BIN_EDGES};
use appdemog::synth::{generate, SynthConfig};
use appdemog::{Attribute, TrainConfig};

fn main() -> appdemog::Result<()> {
    let cfg = SynthConfig {
        n_users: 3000,
        ..SynthConfig::preset("small")?
    };
    let data = generate(&cfg, 12)?;
    let labeled = data.dataset.balanced_labels(Attribute::Gender, 0)?;
    let cv = kfold_cv(&data.dataset.matrix, &labeled, 10, &TrainConfig::default(), 1)?;

    let counts = data.dataset.matrix.row_counts();
    let per_user: Vec<(usize, bool)> = cv.rows.iter().zip(cv.correct()).map(|(&r, ok)| (counts[r], ok)).collect();
    let bins = app_count_bins(&per_user, &DEFAULT_BIN_EDGES)?;
    for b in &bins.points {
        if let (Some(m), Some(se)) = (b.mean, b.dispersion) {
            println!("[{:>3}, {:>5}) n={:<5} {m:.3} ± {se:.3}", b.x, b.x_upper.unwrap(), b.count);
        }
    }

    let low = flags_in_range(&per_user, 20, 35);
    let high = flags_in_range(&per_user, 50, 10_000);
    let t = welch_t_test_flags(&high, &low)?;
    println!("50+ apps vs 20-34 apps: t={:.3} df={:.1} p={:.4}", t.t_statistic, t.degrees_of_freedom, t.p_value_one_sided);
    Ok(())
}
