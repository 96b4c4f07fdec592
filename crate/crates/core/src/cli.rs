//! Command-line surface: argument parsing, run configuration, command
//! dispatch and report emission.
//!
//! Every run writes `report.json`, one or more flat CSVs and a
//! `manifest.json` holding the full [`RunConfig`]; `replay` re-runs a
//! manifest to byte-identical outputs.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::dataset::{ingest, Dataset, DatasetSummary, IngestManifest};
use crate::dense::DenseFeatureMatrix;
use crate::dimred::{category_aggregate, frequency_filter, project, truncated_svd};
use crate::error::{Error, Result};
use crate::eval::{
    app_count_bins, benchmark_174, confidence_coverage, curves::flags_in_range, kfold_cv, learning_curve,
    roc_auc, welch_t_test_flags, CurveReport, CvReport, Protocol, RocPoint, TTestResult, DEFAULT_BIN_EDGES,
};
use crate::logreg::{top_coefficients, train, ModelDocument, PredictorTable, TrainConfig};
use crate::report::{cell, write_atomic, write_json, CsvTable};
use crate::rng::child_seed;
use crate::sampling::{Attribute, LabeledSubset};
use crate::sparse::{Axis, FeatureMatrix, SparseBinaryMatrix};
use crate::synth::{generate, GroundTruth, SynthConfig};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const REPORT_FILE: &str = "report.json";

/// Where the data comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    /// A directory holding `users.csv`, `usage.csv` and `apps.csv`.
    Csv { dir: PathBuf, min_users_per_app: usize },
    Synth { config: SynthConfig, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DimredMethod {
    Freq,
    Category,
    Svd,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Holdout,
    Kfold,
}

/// A command with its protocol parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    Cv {
        k: usize,
    },
    TopApps {
        top: usize,
    },
    Roc {
        k: usize,
        coverage: Vec<f64>,
    },
    LearningCurve {
        sizes: Vec<usize>,
        reps: usize,
        protocol: Protocol,
    },
    Benchmark174 {
        reps: usize,
    },
    Bins {
        k: usize,
        edges: Vec<usize>,
    },
    Dimred {
        method: DimredMethod,
        k: usize,
        components: usize,
        min_share: f64,
    },
    Synth,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Cv { .. } => "cv",
            Command::TopApps { .. } => "top-apps",
            Command::Roc { .. } => "roc",
            Command::LearningCurve { .. } => "learning-curve",
            Command::Benchmark174 { .. } => "benchmark174",
            Command::Bins { .. } => "bins",
            Command::Dimred { .. } => "dimred",
            Command::Synth => "synth",
        }
    }
}

/// Everything a run depends on. Serialized verbatim as `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub source: DataSource,
    pub attributes: Vec<Attribute>,
    pub train: TrainConfig,
    pub seed: u64,
}

fn check_k(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k must be >= 2, got {k}")));
    }
    Ok(())
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if self.attributes.is_empty() {
            return Err(Error::InvalidArgument("no attribute selected".into()));
        }
        match &self.source {
            DataSource::Synth { config, .. } => config.validate()?,
            DataSource::Csv { .. } if self.command == Command::Synth => {
                return Err(Error::InvalidArgument(
                    "synth needs --synth-config or --synth-preset, not --data".into(),
                ))
            }
            DataSource::Csv { .. } => {}
        }
        match &self.command {
            Command::Cv { k } | Command::Bins { k, .. } | Command::Dimred { k, .. } => check_k(*k)?,
            Command::Roc { k, coverage } => {
                check_k(*k)?;
                if let Some(c) = coverage.iter().find(|&&c| !(c > 0.0 && c <= 1.0)) {
                    return Err(Error::InvalidArgument(format!("coverage {c} outside (0, 1]")));
                }
            }
            Command::TopApps { top } if *top == 0 => {
                return Err(Error::InvalidArgument("--top must be >= 1".into()))
            }
            Command::LearningCurve { sizes, reps, protocol } => {
                if *reps == 0 || sizes.is_empty() {
                    return Err(Error::InvalidArgument("learning curve needs sizes and reps >= 1".into()));
                }
                if let Some(s) = sizes.iter().find(|&&s| s == 0 || s % 2 != 0) {
                    return Err(Error::InvalidArgument(format!("training size {s} must be even and positive")));
                }
                if let Protocol::KFold(k) = protocol {
                    check_k(*k)?;
                }
            }
            Command::Benchmark174 { reps } if *reps == 0 => {
                return Err(Error::InvalidArgument("--reps must be >= 1".into()))
            }
            _ => {}
        }
        if let Command::Bins { edges, .. } = &self.command {
            if edges.len() < 2 || edges.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!("bin edges {edges:?} must be strictly increasing")));
            }
        }
        if let Command::Dimred { components, min_share, .. } = &self.command {
            if *components == 0 {
                return Err(Error::InvalidArgument("--components must be >= 1".into()));
            }
            if !(0.0..=1.0).contains(min_share) {
                return Err(Error::InvalidArgument(format!("--min-share {min_share} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Seed of everything done for `attribute`; independent of which other
    /// attributes the run covers.
    pub fn attribute_seed(&self, attribute: Attribute) -> u64 {
        child_seed(self.seed, 10 + attribute.index() as u64)
    }
}

/// What a finished run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub dataset: DatasetSummary,
    pub files: Vec<PathBuf>,
}

/// Load the dataset a source describes.
pub fn load(source: &DataSource) -> Result<(Dataset, DatasetSummary, Option<GroundTruth>)> {
    match source {
        DataSource::Csv { dir, min_users_per_app } => {
            let manifest = IngestManifest {
                min_users_per_app: *min_users_per_app,
                ..IngestManifest::in_dir(dir)
            };
            let (ds, summary) = ingest(&manifest)?;
            Ok((ds, summary, None))
        }
        DataSource::Synth { config, seed } => {
            let s = generate(config, *seed)?;
            let summary = DatasetSummary {
                dropped_apps: s.truth.dropped_apps,
                dropped_users: s.truth.dropped_users,
                ..s.dataset.summary()
            };
            Ok((s.dataset, summary, Some(s.truth)))
        }
    }
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'static str,
    seed: u64,
    dataset: &'a DatasetSummary,
    results: Vec<T>,
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let p = self.dir.join(name);
        write_json(&p, value)?;
        self.files.push(p);
        Ok(())
    }

    fn csv(&mut self, name: &str, table: &CsvTable) -> Result<()> {
        let p = self.dir.join(name);
        table.write(&p)?;
        self.files.push(p);
        Ok(())
    }
}

fn num(x: impl ToString) -> String {
    x.to_string()
}

/// Run a validated configuration, writing into `out`.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<RunSummary> {
    cfg.validate()?;
    let (ds, summary, truth) = load(&cfg.source)?;
    for &a in &cfg.attributes {
        if cfg.command != Command::Synth && !ds.schema.contains(&a) {
            return Err(Error::MissingAttribute(a.name().into()));
        }
    }
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut o = Output {
        dir: out.to_path_buf(),
        files: Vec::new(),
    };

    match &cfg.command {
        Command::Cv { k } => run_cv(cfg, &ds, &summary, *k, &mut o)?,
        Command::TopApps { top } => run_top_apps(cfg, &ds, &summary, *top, &mut o)?,
        Command::Roc { k, coverage } => run_roc(cfg, &ds, &summary, *k, coverage, &mut o)?,
        Command::LearningCurve { sizes, reps, protocol } => {
            run_curve(cfg, &ds, &summary, &mut o, |x, pool, seed| {
                learning_curve(x, pool, sizes, *reps, *protocol, &cfg.train, seed)
            })?
        }
        Command::Benchmark174 { reps } => run_curve(cfg, &ds, &summary, &mut o, |x, pool, seed| {
            benchmark_174(x, pool, *reps, &cfg.train, seed)
        })?,
        Command::Bins { k, edges } => run_bins(cfg, &ds, &summary, *k, edges, &mut o)?,
        Command::Dimred {
            method,
            k,
            components,
            min_share,
        } => run_dimred(cfg, &ds, &summary, *method, *k, *components, *min_share, &mut o)?,
        Command::Synth => {
            ds.export(out)?;
            for f in [crate::dataset::USERS_FILE, crate::dataset::USAGE_FILE, crate::dataset::APPS_FILE] {
                o.files.push(out.join(f));
            }
            o.json("ground_truth.json", &truth)?;
            o.json(
                REPORT_FILE,
                &Report::<()> {
                    command: "synth",
                    seed: cfg.seed,
                    dataset: &summary,
                    results: vec![],
                },
            )?;
        }
    }
    o.json(MANIFEST_FILE, cfg)?;
    Ok(RunSummary {
        dataset: summary,
        files: o.files,
    })
}

/// Re-run the configuration stored in a manifest.
pub fn replay(manifest: &Path, out: &Path) -> Result<RunSummary> {
    let text = std::fs::read_to_string(manifest).map_err(|e| Error::io(manifest, e))?;
    let cfg: RunConfig = serde_json::from_str(&text)?;
    run(&cfg, out)
}

fn balanced(cfg: &RunConfig, ds: &Dataset, a: Attribute) -> Result<LabeledSubset> {
    ds.balanced_labels(a, child_seed(cfg.attribute_seed(a), 0))
}

fn cv_for(cfg: &RunConfig, ds: &Dataset, a: Attribute, k: usize) -> Result<(LabeledSubset, CvReport)> {
    let labeled = balanced(cfg, ds, a)?;
    let report = kfold_cv(&ds.matrix, &labeled, k, &cfg.train, child_seed(cfg.attribute_seed(a), 1))?;
    Ok((labeled, report))
}

#[derive(Serialize)]
struct CvResult {
    attribute: Attribute,
    users: usize,
    k: usize,
    mean_accuracy: f64,
    auc: f64,
    fold_accuracies: Vec<f64>,
    fold_sizes: Vec<usize>,
    converged_folds: usize,
}

impl CvResult {
    fn new(attribute: Attribute, r: &CvReport) -> Self {
        Self {
            attribute,
            users: r.rows.len(),
            k: r.k,
            mean_accuracy: r.mean_accuracy,
            auc: r.auc,
            fold_accuracies: r.fold_accuracies.clone(),
            fold_sizes: r.fold_sizes.clone(),
            converged_folds: r.converged_folds,
        }
    }
}

fn predictions_table(ds: &Dataset, rows: &mut CsvTable, a: Attribute, r: &CvReport) {
    for p in 0..r.rows.len() {
        rows.push(vec![
            a.name().into(),
            ds.user_ids[r.rows[p]].clone(),
            num(r.labels[p]),
            num(r.folds[p]),
            num(r.scores[p]),
        ]);
    }
}

const PREDICTION_HEADER: [&str; 5] = ["attribute", "user_id", "label", "fold", "score"];

fn run_cv(cfg: &RunConfig, ds: &Dataset, summary: &DatasetSummary, k: usize, o: &mut Output) -> Result<()> {
    let mut results = Vec::new();
    let mut folds = CsvTable::new(&["attribute", "fold", "size", "accuracy"]);
    let mut preds = CsvTable::new(&PREDICTION_HEADER);
    for &a in &cfg.attributes {
        let (_, r) = cv_for(cfg, ds, a, k)?;
        for f in 0..r.k {
            folds.push(vec![a.name().into(), num(f), num(r.fold_sizes[f]), num(r.fold_accuracies[f])]);
        }
        predictions_table(ds, &mut preds, a, &r);
        results.push(CvResult::new(a, &r));
    }
    o.json(REPORT_FILE, &Report { command: "cv", seed: cfg.seed, dataset: summary, results })?;
    o.csv("folds.csv", &folds)?;
    o.csv("predictions.csv", &preds)
}

#[derive(Serialize)]
struct TopAppsResult {
    attribute: Attribute,
    users: usize,
    intercept: f64,
    converged: bool,
    positive: PredictorTable,
    negative: PredictorTable,
}

fn run_top_apps(cfg: &RunConfig, ds: &Dataset, summary: &DatasetSummary, top: usize, o: &mut Output) -> Result<()> {
    let mut results = Vec::new();
    let mut table = CsvTable::new(&["attribute", "table", "rank", "app_id", "app_name", "coefficient", "share", "n"]);
    for &a in &cfg.attributes {
        let labeled = balanced(cfg, ds, a)?;
        let x = ds.matrix.select(Axis::Rows, &labeled.row_indices)?;
        let model = train(&x, &labeled.labels, &cfg.train)?;
        let (pos, neg) = top_coefficients(&model, &x, &labeled.labels, &ds.app_names, top)?;
        for (name, t) in [("positive", &pos), ("negative", &neg)] {
            for (rank, p) in t.rows.iter().enumerate() {
                table.push(vec![
                    a.name().into(),
                    name.into(),
                    num(rank + 1),
                    ds.app_ids[p.app_index].clone(),
                    p.app_name.clone(),
                    num(p.coefficient),
                    num(p.share),
                    num(p.n),
                ]);
            }
        }
        let doc = ModelDocument::new(&model, &ds.app_names)?;
        let path = o.dir.join(format!("model_{}.json", a.name()));
        write_atomic(&path, doc.to_json()?.as_bytes())?;
        o.files.push(path);
        results.push(TopAppsResult {
            attribute: a,
            users: labeled.len(),
            intercept: model.intercept,
            converged: model.convergence.is_some_and(|c| c.converged),
            positive: pos,
            negative: neg,
        });
    }
    o.json(REPORT_FILE, &Report { command: "top-apps", seed: cfg.seed, dataset: summary, results })?;
    o.csv("top_apps.csv", &table)
}

#[derive(Serialize)]
struct Coverage {
    coverage: f64,
    accuracy: f64,
}

#[derive(Serialize)]
struct RocResult {
    attribute: Attribute,
    users: usize,
    auc: f64,
    mean_accuracy: f64,
    coverage: Vec<Coverage>,
    points: Vec<RocPoint>,
}

fn run_roc(
    cfg: &RunConfig,
    ds: &Dataset,
    summary: &DatasetSummary,
    k: usize,
    coverage: &[f64],
    o: &mut Output,
) -> Result<()> {
    let mut results = Vec::new();
    let mut curve = CsvTable::new(&["attribute", "threshold", "fpr", "tpr"]);
    let mut cov = CsvTable::new(&["attribute", "coverage", "accuracy"]);
    for &a in &cfg.attributes {
        let (_, r) = cv_for(cfg, ds, a, k)?;
        let roc = roc_auc(&r.scores, &r.labels)?;
        for p in &roc.points {
            curve.push(vec![a.name().into(), cell(p.threshold), num(p.fpr), num(p.tpr)]);
        }
        let coverage = coverage
            .iter()
            .map(|&c| {
                let accuracy = confidence_coverage(&r.scores, &r.labels, c)?;
                cov.push(vec![a.name().into(), num(c), num(accuracy)]);
                Ok(Coverage { coverage: c, accuracy })
            })
            .collect::<Result<_>>()?;
        results.push(RocResult {
            attribute: a,
            users: r.rows.len(),
            auc: roc.auc,
            mean_accuracy: r.mean_accuracy,
            coverage,
            points: roc.points,
        });
    }
    o.json(REPORT_FILE, &Report { command: "roc", seed: cfg.seed, dataset: summary, results })?;
    o.csv("roc.csv", &curve)?;
    o.csv("coverage.csv", &cov)
}

#[derive(Serialize)]
struct CurveResult {
    attribute: Attribute,
    pool: usize,
    #[serde(flatten)]
    curve: CurveReport,
}

fn curve_rows(table: &mut CsvTable, a: Attribute, c: &CurveReport) {
    for p in &c.points {
        table.push(vec![
            a.name().into(),
            num(p.x),
            cell(p.x_upper),
            num(p.count),
            cell(p.mean),
            cell(p.dispersion),
        ]);
    }
}

fn run_curve(
    cfg: &RunConfig,
    ds: &Dataset,
    summary: &DatasetSummary,
    o: &mut Output,
    f: impl Fn(&SparseBinaryMatrix, &LabeledSubset, u64) -> Result<CurveReport>,
) -> Result<()> {
    let mut results = Vec::new();
    let mut table = CsvTable::new(&["attribute", "x", "x_upper", "count", "mean", "dispersion"]);
    for &a in &cfg.attributes {
        let pool = balanced(cfg, ds, a)?;
        let curve = f(&ds.matrix, &pool, child_seed(cfg.attribute_seed(a), 2))?;
        curve_rows(&mut table, a, &curve);
        results.push(CurveResult {
            attribute: a,
            pool: pool.len(),
            curve,
        });
    }
    let name = cfg.command.name();
    o.json(REPORT_FILE, &Report { command: name, seed: cfg.seed, dataset: summary, results })?;
    o.csv(&format!("{}.csv", name.replace('-', "_")), &table)
}

#[derive(Serialize)]
struct BinsResult {
    attribute: Attribute,
    users: usize,
    mean_accuracy: f64,
    #[serde(flatten)]
    bins: CurveReport,
    /// Users with 50 to 149 apps against users with 150 or more.
    t_test: Option<TTestResult>,
}

fn run_bins(
    cfg: &RunConfig,
    ds: &Dataset,
    summary: &DatasetSummary,
    k: usize,
    edges: &[usize],
    o: &mut Output,
) -> Result<()> {
    let mut results = Vec::new();
    let mut table = CsvTable::new(&["attribute", "x", "x_upper", "count", "mean", "dispersion"]);
    let mut tests = CsvTable::new(&["attribute", "n_a", "n_b", "mean_a", "mean_b", "t", "df", "p_one_sided"]);
    for &a in &cfg.attributes {
        let (_, r) = cv_for(cfg, ds, a, k)?;
        let per_user: Vec<(usize, bool)> = r
            .rows
            .iter()
            .zip(r.correct())
            .map(|(&row, ok)| (ds.matrix.row_nnz(row), ok))
            .collect();
        let bins = app_count_bins(&per_user, edges)?;
        curve_rows(&mut table, a, &bins);
        let mid = flags_in_range(&per_user, 50, 150);
        let high = flags_in_range(&per_user, 150, usize::MAX);
        let t_test = if mid.len() >= 2 && high.len() >= 2 {
            let t = welch_t_test_flags(&mid, &high)?;
            tests.push(vec![
                a.name().into(),
                num(t.n_a),
                num(t.n_b),
                num(t.mean_a),
                num(t.mean_b),
                num(t.t_statistic),
                num(t.degrees_of_freedom),
                num(t.p_value_one_sided),
            ]);
            Some(t)
        } else {
            None
        };
        results.push(BinsResult {
            attribute: a,
            users: r.rows.len(),
            mean_accuracy: r.mean_accuracy,
            bins,
            t_test,
        });
    }
    o.json(REPORT_FILE, &Report { command: "bins", seed: cfg.seed, dataset: summary, results })?;
    o.csv("bins.csv", &table)?;
    o.csv("t_test.csv", &tests)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimredScore {
    pub method: &'static str,
    pub features: usize,
    pub mean_accuracy: f64,
    pub auc: f64,
}

#[derive(Serialize)]
struct DimredResult {
    attribute: Attribute,
    users: usize,
    scores: Vec<DimredScore>,
}

/// Cross-validated accuracy without reduction and under each requested
/// reduction, all on the same balanced users and folds.
#[allow(clippy::too_many_arguments)]
pub fn dimred_scores(
    ds: &Dataset,
    labeled: &LabeledSubset,
    method: DimredMethod,
    k: usize,
    components: usize,
    min_share: f64,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<Vec<DimredScore>> {
    let cv_seed = child_seed(seed, 1);
    let score = |method: &'static str, x: &dyn CvInput| -> Result<DimredScore> {
        let r = x.cv(labeled, k, cfg, cv_seed)?;
        Ok(DimredScore {
            method,
            features: x.n_features(),
            mean_accuracy: r.mean_accuracy,
            auc: r.auc,
        })
    };
    let mut scores = vec![score("none", &ds.matrix)?];
    let run = |m: DimredMethod| method == m || method == DimredMethod::All;
    if run(DimredMethod::Freq) {
        let keep = frequency_filter(&ds.matrix, min_share)?;
        scores.push(score("freq", &ds.matrix.select(Axis::Cols, &keep)?)?);
    }
    if run(DimredMethod::Category) {
        scores.push(score("category", &category_aggregate(&ds.matrix, &ds.categories)?)?);
    }
    if run(DimredMethod::Svd) {
        let factors = truncated_svd(&ds.matrix, components, child_seed(seed, 2))?;
        scores.push(score("svd", &project(&factors, &ds.matrix)?)?);
    }
    Ok(scores)
}

trait CvInput {
    fn cv(&self, labeled: &LabeledSubset, k: usize, cfg: &TrainConfig, seed: u64) -> Result<CvReport>;
    fn n_features(&self) -> usize;
}

impl CvInput for SparseBinaryMatrix {
    fn cv(&self, labeled: &LabeledSubset, k: usize, cfg: &TrainConfig, seed: u64) -> Result<CvReport> {
        kfold_cv(self, labeled, k, cfg, seed)
    }
    fn n_features(&self) -> usize {
        self.n_cols()
    }
}

impl CvInput for DenseFeatureMatrix {
    fn cv(&self, labeled: &LabeledSubset, k: usize, cfg: &TrainConfig, seed: u64) -> Result<CvReport> {
        kfold_cv(self, labeled, k, cfg, seed)
    }
    fn n_features(&self) -> usize {
        self.n_cols()
    }
}

#[allow(clippy::too_many_arguments)]
fn run_dimred(
    cfg: &RunConfig,
    ds: &Dataset,
    summary: &DatasetSummary,
    method: DimredMethod,
    k: usize,
    components: usize,
    min_share: f64,
    o: &mut Output,
) -> Result<()> {
    let mut results = Vec::new();
    let mut table = CsvTable::new(&["attribute", "method", "features", "mean_accuracy", "auc"]);
    for &a in &cfg.attributes {
        let labeled = balanced(cfg, ds, a)?;
        let scores = dimred_scores(ds, &labeled, method, k, components, min_share, &cfg.train, cfg.attribute_seed(a))?;
        for s in &scores {
            table.push(vec![
                a.name().into(),
                s.method.into(),
                num(s.features),
                num(s.mean_accuracy),
                num(s.auc),
            ]);
        }
        results.push(DimredResult {
            attribute: a,
            users: labeled.len(),
            scores,
        });
    }
    o.json(REPORT_FILE, &Report { command: "dimred", seed: cfg.seed, dataset: summary, results })?;
    o.csv("dimred.csv", &table)
}

// Argument parsing.

#[derive(Debug, Parser)]
#[command(name = "appdemog", version, about = "Demographic prediction from bag-of-apps data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Directory holding users.csv, usage.csv and apps.csv.
    #[arg(long, value_name = "DIR", conflicts_with_all = ["synth_config", "synth_preset"])]
    pub data: Option<PathBuf>,
    /// JSON file with a synthetic-data configuration.
    #[arg(long, value_name = "FILE", conflicts_with = "synth_preset")]
    pub synth_config: Option<PathBuf>,
    /// Named synthetic configuration: paper-scale or small.
    #[arg(long, value_name = "NAME")]
    pub synth_preset: Option<String>,
    /// Apps with fewer users are dropped at ingest.
    #[arg(long, default_value_t = 10)]
    pub min_users_per_app: usize,
    #[arg(long, default_value = "gender")]
    pub attribute: Attribute,
    /// Loop over all six attributes.
    #[arg(long)]
    pub all_attributes: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// k-fold cross-validated accuracy and AUC.
    Cv {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        k: usize,
    },
    /// Strongest positive and negative predictors of a model on all users.
    TopApps {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Out-of-fold ROC curve and accuracy among the most confident users.
    Roc {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1")]
        coverage: Vec<f64>,
    },
    /// Accuracy against the number of training users.
    LearningCurve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "100,200,400,800,1600")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, value_enum, default_value_t = ProtocolKind::Holdout)]
        protocol: ProtocolKind,
        /// Folds when the protocol is kfold.
        #[arg(long, default_value_t = 10)]
        k: usize,
    },
    /// 2-fold CV on repeated balanced subsamples of 174 users.
    Benchmark174 {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 300)]
        reps: usize,
    },
    /// Accuracy by number of apps per user, with a Welch t-test.
    Bins {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, value_delimiter = ',')]
        edges: Option<Vec<usize>>,
    },
    /// Accuracy after frequency filtering, category aggregation or SVD.
    Dimred {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = DimredMethod::All)]
        method: DimredMethod,
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// SVD components.
        #[arg(long, default_value_t = 48)]
        components: usize,
        /// Frequency filter threshold.
        #[arg(long, default_value_t = 0.1)]
        min_share: f64,
    },
    /// Generate a synthetic dataset as CSV plus its ground truth.
    Synth {
        #[command(flatten)]
        common: Common,
    },
    /// Re-run a manifest.json.
    Replay {
        #[arg(long, value_name = "FILE")]
        manifest: PathBuf,
        #[arg(long, value_name = "DIR", default_value = "out")]
        out: PathBuf,
    },
}

/// A parsed invocation: either a configuration to run or a manifest to replay.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Invocation {
    Run { config: RunConfig, out: PathBuf },
    Replay { manifest: PathBuf, out: PathBuf },
}

impl Common {
    fn source(&self) -> Result<DataSource> {
        let synth = |config: SynthConfig| DataSource::Synth { config, seed: self.seed };
        match (&self.data, &self.synth_config, &self.synth_preset) {
            (Some(dir), None, None) => Ok(DataSource::Csv {
                dir: dir.clone(),
                min_users_per_app: self.min_users_per_app,
            }),
            (None, Some(file), None) => {
                let text = std::fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
                let config = serde_json::from_str(&text)
                    .map_err(|e| Error::InvalidArgument(format!("{}: {e}", file.display())))?;
                Ok(synth(config))
            }
            (None, None, Some(name)) => Ok(synth(SynthConfig::preset(name)?)),
            _ => Err(Error::InvalidArgument(
                "give exactly one of --data, --synth-config or --synth-preset".into(),
            )),
        }
    }

    fn config(&self, command: Command) -> Result<RunConfig> {
        Ok(RunConfig {
            command,
            source: self.source()?,
            attributes: if self.all_attributes {
                Attribute::ALL.to_vec()
            } else {
                vec![self.attribute]
            },
            train: TrainConfig {
                lambda: self.lambda,
                max_iterations: self.max_iterations,
                gradient_tolerance: self.tolerance,
                ..TrainConfig::default()
            },
            seed: self.seed,
        })
    }
}

impl CliCommand {
    pub fn into_invocation(self) -> Result<Invocation> {
        let (common, command) = match self {
            CliCommand::Replay { manifest, out } => return Ok(Invocation::Replay { manifest, out }),
            CliCommand::Cv { common, k } => (common, Command::Cv { k }),
            CliCommand::TopApps { common, top } => (common, Command::TopApps { top }),
            CliCommand::Roc { common, k, coverage } => (common, Command::Roc { k, coverage }),
            CliCommand::LearningCurve {
                common,
                sizes,
                reps,
                protocol,
                k,
            } => {
                let protocol = match protocol {
                    ProtocolKind::Holdout => Protocol::Holdout,
                    ProtocolKind::Kfold => Protocol::KFold(k),
                };
                (common, Command::LearningCurve { sizes, reps, protocol })
            }
            CliCommand::Benchmark174 { common, reps } => (common, Command::Benchmark174 { reps }),
            CliCommand::Bins { common, k, edges } => (
                common,
                Command::Bins {
                    k,
                    edges: edges.unwrap_or_else(|| DEFAULT_BIN_EDGES.to_vec()),
                },
            ),
            CliCommand::Dimred {
                common,
                method,
                k,
                components,
                min_share,
            } => (
                common,
                Command::Dimred {
                    method,
                    k,
                    components,
                    min_share,
                },
            ),
            CliCommand::Synth { common } => (common, Command::Synth),
        };
        let config = common.config(command)?;
        config.validate()?;
        Ok(Invocation::Run {
            config,
            out: common.out,
        })
    }
}

/// Parse-and-run entry point used by the binary.
pub fn execute(invocation: &Invocation) -> Result<RunSummary> {
    match invocation {
        Invocation::Run { config, out } => run(config, out),
        Invocation::Replay { manifest, out } => replay(manifest, out),
    }
}
