//! Synthetic panels with planted per-app demographic signal.
//!
//! Apps are independent given the labels: app `j` is used with probability
//! `σ(l_j + y·δ_j)`, where `l_j = logit(q_j)` is its base popularity and
//! `δ_j` is nonzero only on the app's signal attribute. Signal sets of
//! different attributes are disjoint. Because of that structure the
//! Bayes-optimal classifier is closed-form, and [`bayes_accuracy`] gives the
//! accuracy ceiling for any learner.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::dimred::CategoryMap;
use crate::error::{Error, Result};
use crate::eval::special::ln_gamma;
use crate::logreg::{sigmoid, softplus};
use crate::rng::{child_seed, substream};
use crate::sampling::{Attribute, DemographicRecord};
use crate::sparse::SparseBinaryMatrix;

const LOGIT_CLAMP: f64 = 30.0;
const BIAS_DEFAULT: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_users: usize,
    /// Apps before the minimum-user filter.
    pub n_apps: usize,
    pub zipf_exponent: f64,
    /// Target mean apps per user after the filter.
    pub mean_apps_per_user: f64,
    /// Cap on any base usage probability.
    pub max_usage_probability: f64,
    /// Fraction of apps carrying signal, shared out evenly over the six
    /// attributes.
    pub signal_fraction: f64,
    /// `δ_max`: shifts are uniform on `[−δ_max, δ_max]`.
    pub signal_strength: f64,
    /// Signal apps are drawn with weight `rank^(−s·bias)`: 0 places signal
    /// uniformly, 1 in proportion to popularity.
    pub signal_popularity_bias: f64,
    pub missing_rate: f64,
    pub min_users_per_app: usize,
    pub n_categories: usize,
    /// Per-attribute seeds in [`Attribute::ALL`] order; derived from the
    /// master seed when absent.
    pub attribute_seeds: Option<[u64; 6]>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_users: 3760,
            n_apps: 8840,
            zipf_exponent: 1.2,
            mean_apps_per_user: 82.6,
            max_usage_probability: 0.95,
            signal_fraction: 0.05,
            signal_strength: 1.5,
            signal_popularity_bias: BIAS_DEFAULT,
            missing_rate: 0.02,
            min_users_per_app: 10,
            n_categories: 48,
            attribute_seeds: None,
        }
    }
}

impl SynthConfig {
    /// Named presets: `paper-scale` (the defaults) and `small`.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "paper-scale" => Ok(Self::default()),
            "small" => Ok(Self {
                n_users: 1000,
                n_apps: 1500,
                mean_apps_per_user: 40.0,
                ..Self::default()
            }),
            _ => Err(Error::InvalidArgument(format!(
                "unknown synth preset `{name}` (expected paper-scale or small)"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n_users == 0 || self.n_apps == 0 || self.n_categories == 0 {
            return bad("n_users, n_apps and n_categories must be >= 1".into());
        }
        for (name, v) in [("signal_fraction", self.signal_fraction), ("missing_rate", self.missing_rate)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} = {v} outside [0, 1]"));
            }
        }
        if !(self.signal_strength >= 0.0 && self.signal_strength.is_finite()) {
            return bad(format!("signal_strength = {} must be finite and >= 0", self.signal_strength));
        }
        if !(self.signal_popularity_bias >= 0.0 && self.signal_popularity_bias.is_finite()) {
            return bad(format!("signal_popularity_bias = {} must be finite and >= 0", self.signal_popularity_bias));
        }
        if !(self.zipf_exponent >= 0.0 && self.zipf_exponent.is_finite()) {
            return bad(format!("zipf_exponent = {} must be finite and >= 0", self.zipf_exponent));
        }
        if !(self.max_usage_probability > 0.0 && self.max_usage_probability < 1.0) {
            return bad(format!("max_usage_probability = {} outside (0, 1)", self.max_usage_probability));
        }
        if !(self.mean_apps_per_user > 0.0 && self.mean_apps_per_user.is_finite()) {
            return bad(format!("mean_apps_per_user = {} must be positive", self.mean_apps_per_user));
        }
        Ok(())
    }

    /// Signal apps of each attribute, in [`Attribute::ALL`] order.
    pub fn signal_apps_per_attribute(&self) -> [usize; 6] {
        let total = ((self.signal_fraction * self.n_apps as f64).round() as usize).min(self.n_apps);
        std::array::from_fn(|a| total / 6 + usize::from(a < total % 6))
    }

    fn attribute_seed(&self, seed: u64, a: usize) -> u64 {
        match self.attribute_seeds {
            Some(s) => s[a],
            None => child_seed(seed, 100 + a as u64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalApp {
    /// Column in the generated matrix.
    pub app: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeTruth {
    pub attribute: Attribute,
    pub signal: Vec<SignalApp>,
}

impl AttributeTruth {
    /// Signal apps by decreasing `|δ|`, ties by column.
    pub fn strongest(&self, n: usize) -> Vec<SignalApp> {
        let mut s = self.signal.clone();
        s.sort_by(|a, b| b.delta.abs().total_cmp(&a.delta.abs()).then(a.app.cmp(&b.app)));
        s.truncate(n);
        s
    }
}

/// The generative parameters of the surviving apps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// `q_j` for each column.
    pub base_probability: Vec<f64>,
    /// In [`Attribute::ALL`] order.
    pub attributes: Vec<AttributeTruth>,
    /// Popularity scale found by calibration.
    pub scale: f64,
    pub dropped_apps: usize,
    pub dropped_users: usize,
}

impl GroundTruth {
    pub fn attribute(&self, attribute: Attribute) -> &AttributeTruth {
        &self.attributes[attribute.index()]
    }

    /// Dense `δ` per column; zero off the signal set.
    pub fn shifts(&self, attribute: Attribute) -> Vec<f64> {
        let mut d = vec![0.0; self.base_probability.len()];
        for s in &self.attribute(attribute).signal {
            d[s.app] = s.delta;
        }
        d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub dataset: Dataset,
    pub truth: GroundTruth,
    /// The latent label of each user, per attribute, before missingness.
    pub labels: Vec<Vec<u8>>,
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn shifted(q: f64, delta: f64) -> f64 {
    sigmoid((logit(q) + delta).clamp(-LOGIT_CLAMP, LOGIT_CLAMP))
}

/// `P(Bin(n, p) >= m)`.
fn binomial_tail(n: usize, p: f64, m: usize) -> f64 {
    if m == 0 {
        return 1.0;
    }
    if m > n {
        return 0.0;
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let ln_n = ln_gamma(n as f64 + 1.0);
    let below: f64 = (0..m)
        .map(|k| {
            let kf = k as f64;
            (ln_n - ln_gamma(kf + 1.0) - ln_gamma((n - k) as f64 + 1.0) + kf * lp + (n - k) as f64 * lq).exp()
        })
        .sum();
    (1.0 - below).max(0.0)
}

fn popularity(cfg: &SynthConfig, scale: f64) -> Vec<f64> {
    (0..cfg.n_apps)
        .map(|j| (scale * ((j + 1) as f64).powf(-cfg.zipf_exponent)).min(cfg.max_usage_probability))
        .collect()
}

/// Expected apps per user counting only apps expected to pass the filter.
fn expected_filtered_mean(cfg: &SynthConfig, q: &[f64], delta: &[f64]) -> f64 {
    q.iter()
        .zip(delta)
        .map(|(&q, &d)| {
            let p = if d == 0.0 { q } else { 0.5 * (q + shifted(q, d)) };
            p * binomial_tail(cfg.n_users, p, cfg.min_users_per_app)
        })
        .sum()
}

/// Zipf scale whose popularity gives the target post-filter mean.
fn calibrate_scale(cfg: &SynthConfig, delta: &[f64]) -> Result<f64> {
    let mean = |c: f64| expected_filtered_mean(cfg, &popularity(cfg, c), delta);
    let mut hi = cfg.max_usage_probability * (cfg.n_apps as f64).powf(cfg.zipf_exponent);
    if mean(hi) < cfg.mean_apps_per_user {
        return Err(Error::InvalidArgument(format!(
            "mean of {} apps per user is unreachable with {} apps, {} users and max usage probability {}",
            cfg.mean_apps_per_user, cfg.n_apps, cfg.n_users, cfg.max_usage_probability
        )));
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mean(mid) < cfg.mean_apps_per_user {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn raw_value(record: &mut DemographicRecord, attribute: Attribute, label: u8, rng: &mut impl rand::Rng) {
    const RACES: [&str; 4] = ["black", "asian", "hispanic", "other"];
    const LOW_INCOME: [u64; 4] = [10_000, 20_000, 30_000, 40_000];
    const HIGH_INCOME: [u64; 5] = [50_000, 60_000, 75_000, 100_000, 150_000];
    let pos = label == 1;
    match attribute {
        Attribute::Gender => record.gender = Some(if pos { "male" } else { "female" }.into()),
        Attribute::Age => record.age = Some(if pos { rng.random_range(18..=32) } else { rng.random_range(33..=90) }),
        Attribute::Race => {
            record.race = Some(if pos { "white" } else { RACES[rng.random_range(0..RACES.len())] }.into())
        }
        Attribute::Married => record.married = Some(if pos { "married" } else { "single" }.into()),
        Attribute::Children => record.children = Some(if pos { 0 } else { rng.random_range(1..=4) }),
        Attribute::Income => {
            record.income = Some(if pos {
                LOW_INCOME[rng.random_range(0..LOW_INCOME.len())]
            } else {
                HIGH_INCOME[rng.random_range(0..HIGH_INCOME.len())]
            })
        }
    }
}

/// Draw a dataset. Deterministic given `cfg` and `seed`, independent of
/// the thread count.
pub fn generate(cfg: &SynthConfig, seed: u64) -> Result<SyntheticDataset> {
    cfg.validate()?;
    let n_signal = cfg.signal_apps_per_attribute();
    let total_signal: usize = n_signal.iter().sum();

    // Disjoint signal sets from one weighted draw over the apps.
    let mut placement_rng = substream(seed, 0);
    let w = cfg.zipf_exponent * cfg.signal_popularity_bias;
    let mut order = rand::seq::index::sample_weighted(
        &mut placement_rng,
        cfg.n_apps,
        |j| ((j + 1) as f64).powf(-w),
        total_signal,
    )
    .map_err(|e| Error::InvalidArgument(format!("signal placement: {e}")))?
    .into_vec();
    order.shuffle(&mut placement_rng);
    let mut signal_attr = vec![usize::MAX; cfg.n_apps];
    let mut delta = vec![0.0; cfg.n_apps];
    let mut start = 0;
    for (a, &n) in n_signal.iter().enumerate() {
        let mut rng = substream(cfg.attribute_seed(seed, a), 0);
        let chosen = &order[start..start + n];
        start += n;
        for &j in chosen {
            signal_attr[j] = a;
            delta[j] = if cfg.signal_strength > 0.0 {
                rng.random_range(-cfg.signal_strength..=cfg.signal_strength)
            } else {
                0.0
            };
        }
    }

    let scale = calibrate_scale(cfg, &delta)?;
    let q = popularity(cfg, scale);
    let p_shifted: Vec<f64> = q.iter().zip(&delta).map(|(&q, &d)| shifted(q, d)).collect();

    let mut labels = vec![vec![0u8; cfg.n_users]; 6];
    let mut records: Vec<DemographicRecord> = (0..cfg.n_users)
        .map(|i| DemographicRecord {
            user_row: i,
            ..Default::default()
        })
        .collect();
    for (a, attribute) in Attribute::ALL.into_iter().enumerate() {
        let aseed = cfg.attribute_seed(seed, a);
        let mut label_rng = substream(aseed, 1);
        let mut missing_rng = substream(aseed, 2);
        let mut value_rng = substream(aseed, 3);
        for (i, record) in records.iter_mut().enumerate() {
            let y = label_rng.random_bool(0.5) as u8;
            labels[a][i] = y;
            if !missing_rng.random_bool(cfg.missing_rate) {
                raw_value(record, attribute, y, &mut value_rng);
            }
        }
    }

    let usage_seed = child_seed(seed, 1);
    let rows: Vec<Vec<usize>> = (0..cfg.n_users)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(usage_seed, i as u64);
            (0..cfg.n_apps)
                .filter(|&j| {
                    let a = signal_attr[j];
                    let p = if a != usize::MAX && labels[a][i] == 1 { p_shifted[j] } else { q[j] };
                    rng.random::<f64>() < p
                })
                .collect()
        })
        .collect();
    let matrix = SparseBinaryMatrix::from_rows(rows, cfg.n_apps)?;

    let mut category_rng = substream(seed, 2);
    let width = (cfg.n_categories.to_string().len()).max(2);
    let app_categories: Vec<String> = (0..cfg.n_apps)
        .map(|_| format!("category_{:0width$}", category_rng.random_range(1..=cfg.n_categories)))
        .collect();
    let id_width = cfg.n_apps.to_string().len().max(4);
    let app_ids: Vec<String> = (1..=cfg.n_apps).map(|j| format!("app_{j:0id_width$}")).collect();
    let user_width = cfg.n_users.to_string().len().max(4);

    let support = matrix.column_support();
    let kept: Vec<usize> = (0..cfg.n_apps).filter(|&j| support[j] >= cfg.min_users_per_app).collect();
    if kept.is_empty() {
        return Err(Error::InsufficientPopulation(format!(
            "no app reaches {} users; raise n_users or mean_apps_per_user",
            cfg.min_users_per_app
        )));
    }

    let mut dataset = Dataset {
        matrix,
        user_ids: (1..=cfg.n_users).map(|i| format!("user_{i:0user_width$}")).collect(),
        app_names: app_ids.clone(),
        app_ids,
        categories: CategoryMap::from_labels(&app_categories)?,
        records,
        schema: Attribute::ALL.to_vec(),
    };
    let users_before: Vec<usize> = {
        let filtered = dataset.matrix.select(crate::sparse::Axis::Cols, &kept)?;
        (0..cfg.n_users).filter(|&i| filtered.row_nnz(i) > 0).collect()
    };
    let (dropped_apps, dropped_users) = dataset.apply_filters(cfg.min_users_per_app)?;
    if dataset.n_users() == 0 {
        return Err(Error::InsufficientPopulation("every generated user is empty".into()));
    }
    let labels: Vec<Vec<u8>> = labels
        .iter()
        .map(|l| users_before.iter().map(|&i| l[i]).collect())
        .collect();

    let attributes = Attribute::ALL
        .into_iter()
        .enumerate()
        .map(|(a, attribute)| AttributeTruth {
            attribute,
            signal: kept
                .iter()
                .enumerate()
                .filter(|&(_, &j)| signal_attr[j] == a)
                .map(|(col, &j)| SignalApp { app: col, delta: delta[j] })
                .collect(),
        })
        .collect();
    let truth = GroundTruth {
        base_probability: kept.iter().map(|&j| q[j]).collect(),
        attributes,
        scale,
        dropped_apps,
        dropped_users,
    };
    Ok(SyntheticDataset { dataset, truth, labels })
}

/// Monte-Carlo accuracy of the exact posterior classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BayesEstimate {
    pub accuracy: f64,
    pub standard_error: f64,
    pub n_mc: usize,
}

/// Accuracy of the Bayes-optimal classifier for `attribute` under `truth`,
/// estimated from `n_mc` fresh draws of a balanced label and the app usage.
pub fn bayes_accuracy(truth: &GroundTruth, attribute: Attribute, n_mc: usize, seed: u64) -> Result<BayesEstimate> {
    if n_mc < 1000 {
        return Err(Error::InvalidArgument(format!("n_mc = {n_mc} must be >= 1000")));
    }
    // Only signal apps move the posterior odds.
    let apps: Vec<(f64, f64, f64)> = truth
        .attribute(attribute)
        .signal
        .iter()
        .map(|s| {
            let l = logit(truth.base_probability[s.app]);
            let l1 = (l + s.delta).clamp(-LOGIT_CLAMP, LOGIT_CLAMP);
            (sigmoid(l), sigmoid(l1), l1 - l)
        })
        .collect();
    // log((1−p1)/(1−p0)) = softplus(l) − softplus(l1).
    let offset: f64 = apps.iter().map(|&(p0, p1, _)| softplus(logit(p0)) - softplus(logit(p1))).sum();

    const CHUNK: usize = 1000;
    let n_chunks = n_mc.div_ceil(CHUNK);
    let correct: usize = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(seed, c as u64);
            let n = CHUNK.min(n_mc - c * CHUNK);
            (0..n)
                .filter(|_| {
                    let y = rng.random_bool(0.5);
                    let mut log_odds = offset;
                    for &(p0, p1, w) in &apps {
                        if rng.random::<f64>() < if y { p1 } else { p0 } {
                            log_odds += w;
                        }
                    }
                    (log_odds >= 0.0) == y
                })
                .count()
        })
        .sum();
    let accuracy = correct as f64 / n_mc as f64;
    Ok(BayesEstimate {
        accuracy,
        standard_error: (accuracy * (1.0 - accuracy) / n_mc as f64).sqrt(),
        n_mc,
    })
}
