//! Evaluation protocols on generated data.

use appdemog::eval::{
    app_count_bins, benchmark_174, confidence_coverage, kfold_cv, learning_curve, Protocol, DEFAULT_BIN_EDGES,
};
use appdemog::rng::child_seed;
use appdemog::sampling::balanced_subsample;
use appdemog::synth::{bayes_accuracy, generate, SynthConfig};
use appdemog::{Attribute, TrainConfig};
use rand::{Rng, SeedableRng};

fn no_signal(n_users: usize) -> SynthConfig {
    SynthConfig {
        n_users,
        signal_strength: 0.0,
        ..SynthConfig::default()
    }
}

#[test]
fn no_signal_cv_is_a_coin() {
    let s = generate(&no_signal(2000), 1).unwrap();
    let labeled = s.dataset.balanced_labels(Attribute::Gender, 2).unwrap();
    let r = kfold_cv(&s.dataset.matrix, &labeled, 10, &TrainConfig::default(), 3).unwrap();
    assert!((r.mean_accuracy - 0.5).abs() <= 0.04, "{}", r.mean_accuracy);
}

#[test]
fn learning_curve_is_reproducible() {
    let s = generate(&SynthConfig::preset("small").unwrap(), 2).unwrap();
    let pool = s.dataset.balanced_labels(Attribute::Gender, 1).unwrap();
    let run = || learning_curve(&s.dataset.matrix, &pool, &[40, 100], 5, Protocol::Holdout, &TrainConfig::default(), 9);
    let a = run().unwrap();
    assert_eq!(a, run().unwrap());
    assert_eq!(a.points.len(), 2);
    assert!(a.points.iter().all(|p| p.count == 5 && p.dispersion.unwrap() >= 0.0));
    // A size's repetitions do not depend on the other sizes requested.
    let alone = learning_curve(&s.dataset.matrix, &pool, &[100], 5, Protocol::Holdout, &TrainConfig::default(), 9).unwrap();
    assert_eq!(alone.points[0], a.points[1]);
}

#[test]
fn benchmark_with_one_rep_is_one_two_fold_cv() {
    let s = generate(&SynthConfig::preset("small").unwrap(), 4).unwrap();
    let pool = s.dataset.balanced_labels(Attribute::Age, 1).unwrap();
    let cfg = TrainConfig::default();
    let b = benchmark_174(&s.dataset.matrix, &pool, 1, &cfg, 77).unwrap();
    let task = child_seed(child_seed(77, 174), 0);
    let sub = balanced_subsample(&pool, 174, task).unwrap();
    let cv = kfold_cv(&s.dataset.matrix, &sub, 2, &cfg, task).unwrap();
    assert_eq!(b.points[0].mean, Some(cv.mean_accuracy));
    assert_eq!(b.points[0].dispersion, Some(0.0));
    assert_eq!(b, benchmark_174(&s.dataset.matrix, &pool, 1, &cfg, 77).unwrap());
}

#[test]
fn benchmark_tracks_a_moderate_bayes_rate() {
    // Few apps, all carrying signal, so 87 training users can learn them.
    let cfg = SynthConfig {
        n_users: 2000,
        n_apps: 60,
        mean_apps_per_user: 15.0,
        signal_fraction: 1.0,
        signal_strength: 1.6,
        ..SynthConfig::default()
    };
    let s = generate(&cfg, 5).unwrap();
    let bayes = bayes_accuracy(&s.truth, Attribute::Gender, 100_000, 1).unwrap();
    assert!((0.65..=0.75).contains(&bayes.accuracy), "{bayes:?}");
    let pool = s.dataset.balanced_labels(Attribute::Gender, 2).unwrap();
    let r = benchmark_174(&s.dataset.matrix, &pool, 300, &TrainConfig::default(), 3).unwrap();
    let mean = r.points[0].mean.unwrap();
    assert!((0.60..=0.72).contains(&mean), "benchmark {mean} at Bayes {}", bayes.accuracy);
}

#[test]
fn bins_rise_when_signal_grows_with_app_count() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let users: Vec<(usize, bool)> = (0..20_000)
        .map(|_| {
            let apps = rng.random_range(1..100);
            let p = 0.5 + 0.45 * apps as f64 / 100.0;
            (apps, rng.random_bool(p))
        })
        .collect();
    let r = app_count_bins(&users, &DEFAULT_BIN_EDGES).unwrap();
    let low: Vec<f64> = r.points[..5].iter().map(|p| p.mean.unwrap()).collect();
    assert!(low.windows(2).all(|w| w[1] > w[0]), "{low:?}");
}

#[test]
fn confidence_coverage_against_exhaustive_recomputation() {
    let s = generate(&SynthConfig::preset("small").unwrap(), 8).unwrap();
    let labeled = s.dataset.balanced_labels(Attribute::Gender, 1).unwrap();
    let r = kfold_cv(&s.dataset.matrix, &labeled, 10, &TrainConfig::default(), 2).unwrap();
    let half = confidence_coverage(&r.scores, &r.labels, 0.5).unwrap();
    let all = confidence_coverage(&r.scores, &r.labels, 1.0).unwrap();
    assert_eq!(all, r.pooled_accuracy());
    assert!(half >= all, "{half} < {all}");

    // Recompute: keep every user at least as confident as the median one.
    let n = r.scores.len();
    let take = n.div_ceil(2);
    let mut conf: Vec<(f64, bool)> = r
        .scores
        .iter()
        .zip(r.correct())
        .map(|(&s, ok)| ((s - 0.5).abs(), ok))
        .collect();
    conf.sort_by(|a, b| b.0.total_cmp(&a.0));
    let cutoff = conf[take - 1].0;
    let strictly_above = conf.iter().filter(|c| c.0 > cutoff).count();
    let at_cutoff: Vec<bool> = conf.iter().filter(|c| c.0 == cutoff).map(|c| c.1).collect();
    let above_correct = conf.iter().filter(|c| c.0 > cutoff && c.1).count();
    // Whichever cutoff-tied users fill the remaining slots, the result lies in this range.
    let need = take - strictly_above;
    let tied_correct = at_cutoff.iter().filter(|&&b| b).count();
    let lo = (above_correct + need.saturating_sub(at_cutoff.len() - tied_correct)) as f64 / take as f64;
    let hi = (above_correct + need.min(tied_correct)) as f64 / take as f64;
    assert!((lo..=hi).contains(&half), "{half} outside [{lo}, {hi}]");
}
