//! The in-memory dataset and its CSV form.
//!
//! Three headered, comma-separated UTF-8 files:
//!
//! - `users.csv`: `user_id` plus any of `gender, age, race, married,
//!   children, income` (empty field = missing; income is annual USD)
//! - `usage.csv`: `user_id, app_id`, one row per used pair, duplicates allowed
//! - `apps.csv`: `app_id, app_name, category`

use std::collections::HashMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dimred::CategoryMap;
use crate::error::{Error, Result};
use crate::report::write_atomic;
use crate::sampling::{balance, binarize, Attribute, DemographicRecord, LabeledSubset};
use crate::sparse::{Axis, FeatureMatrix, SparseBinaryMatrix};

pub const USERS_FILE: &str = "users.csv";
pub const USAGE_FILE: &str = "usage.csv";
pub const APPS_FILE: &str = "apps.csv";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub matrix: SparseBinaryMatrix,
    pub user_ids: Vec<String>,
    pub app_ids: Vec<String>,
    pub app_names: Vec<String>,
    pub categories: CategoryMap,
    pub records: Vec<DemographicRecord>,
    /// Attributes present as columns in the source.
    pub schema: Vec<Attribute>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub users: usize,
    pub apps: usize,
    pub mean_apps_per_user: f64,
    pub dropped_apps: usize,
    pub dropped_users: usize,
}

impl Dataset {
    pub fn n_users(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn n_apps(&self) -> usize {
        self.matrix.n_cols()
    }

    pub fn summary(&self) -> DatasetSummary {
        DatasetSummary {
            users: self.n_users(),
            apps: self.n_apps(),
            mean_apps_per_user: self.matrix.nnz() as f64 / self.n_users().max(1) as f64,
            dropped_apps: 0,
            dropped_users: 0,
        }
    }

    /// Labels for `attribute` under its default rule.
    pub fn labels(&self, attribute: Attribute) -> Result<LabeledSubset> {
        if !self.schema.contains(&attribute) {
            return Err(Error::MissingAttribute(attribute.name().into()));
        }
        binarize(&self.records, &attribute.default_rule())
    }

    /// Labels for `attribute`, class-balanced.
    pub fn balanced_labels(&self, attribute: Attribute, seed: u64) -> Result<LabeledSubset> {
        balance(&self.labels(attribute)?, seed)
    }

    /// Drop apps used by fewer than `min_users_per_app` users, then users
    /// left without apps. Returns the counts dropped.
    pub fn apply_filters(&mut self, min_users_per_app: usize) -> Result<(usize, usize)> {
        let support = self.matrix.column_support();
        let keep_apps: Vec<usize> = (0..self.n_apps()).filter(|&j| support[j] >= min_users_per_app).collect();
        let dropped_apps = self.n_apps() - keep_apps.len();
        if dropped_apps > 0 {
            self.matrix = self.matrix.select(Axis::Cols, &keep_apps)?;
            self.app_ids = keep_apps.iter().map(|&j| self.app_ids[j].clone()).collect();
            self.app_names = keep_apps.iter().map(|&j| self.app_names[j].clone()).collect();
            let labels: Vec<&str> = keep_apps.iter().map(|&j| self.categories.label(j)).collect();
            self.categories = CategoryMap::from_labels(&labels)?;
        }

        let keep_users: Vec<usize> = (0..self.n_users()).filter(|&i| self.matrix.row_nnz(i) > 0).collect();
        let dropped_users = self.n_users() - keep_users.len();
        if dropped_users > 0 {
            self.matrix = self.matrix.select(Axis::Rows, &keep_users)?;
            self.user_ids = keep_users.iter().map(|&i| self.user_ids[i].clone()).collect();
            self.records = keep_users
                .iter()
                .enumerate()
                .map(|(new, &old)| DemographicRecord {
                    user_row: new,
                    ..self.records[old].clone()
                })
                .collect();
        }
        Ok((dropped_apps, dropped_users))
    }

    /// Write the CSV triple into `dir`.
    pub fn export(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

        let mut users = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["user_id"];
        header.extend(self.schema.iter().map(|a| a.name()));
        users.write_record(&header).map_err(csv_err)?;
        for (id, r) in self.user_ids.iter().zip(&self.records) {
            let mut row = vec![id.clone()];
            for &a in &self.schema {
                row.push(match a {
                    Attribute::Gender => r.gender.clone().unwrap_or_default(),
                    Attribute::Race => r.race.clone().unwrap_or_default(),
                    Attribute::Married => r.married.clone().unwrap_or_default(),
                    Attribute::Age => r.age.map(|v| v.to_string()).unwrap_or_default(),
                    Attribute::Children => r.children.map(|v| v.to_string()).unwrap_or_default(),
                    Attribute::Income => r.income.map(|v| v.to_string()).unwrap_or_default(),
                });
            }
            users.write_record(&row).map_err(csv_err)?;
        }

        let mut usage = csv::Writer::from_writer(Vec::new());
        usage.write_record(["user_id", "app_id"]).map_err(csv_err)?;
        for (i, j) in self.matrix.entries() {
            usage.write_record([&self.user_ids[i], &self.app_ids[j]]).map_err(csv_err)?;
        }

        let mut apps = csv::Writer::from_writer(Vec::new());
        apps.write_record(["app_id", "app_name", "category"]).map_err(csv_err)?;
        for j in 0..self.n_apps() {
            apps.write_record([&self.app_ids[j], &self.app_names[j], self.categories.label(j)])
                .map_err(csv_err)?;
        }

        for (name, w) in [(USERS_FILE, users), (USAGE_FILE, usage), (APPS_FILE, apps)] {
            let bytes = w.into_inner().map_err(|e| Error::Data(e.to_string()))?;
            write_atomic(&dir.join(name), &bytes)?;
        }
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Data(format!("csv: {e}"))
}

/// Where to read a dataset from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestManifest {
    pub users: PathBuf,
    pub usage: PathBuf,
    pub apps: PathBuf,
    pub min_users_per_app: usize,
}

impl IngestManifest {
    /// The standard file names inside `dir`, with the default ten-user
    /// threshold.
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            users: dir.join(USERS_FILE),
            usage: dir.join(USAGE_FILE),
            apps: dir.join(APPS_FILE),
            min_users_per_app: 10,
        }
    }
}

struct Table {
    path: PathBuf,
    columns: HashMap<String, usize>,
    rows: Vec<(u64, csv::StringRecord)>,
}

impl Table {
    fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
        let header = reader
            .headers()
            .map_err(|e| parse_error(path, 1, e.to_string()))?
            .clone();
        let columns = header
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim().trim_start_matches('\u{feff}').to_ascii_lowercase(), i))
            .collect();
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                parse_error(path, line, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            rows.push((line, rec));
        }
        Ok(Self {
            path: path.to_path_buf(),
            columns,
            rows,
        })
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.columns
            .get(name)
            .copied()
            .ok_or_else(|| parse_error(&self.path, 1, format!("missing column `{name}`")))
    }
}

fn parse_error(path: &Path, line: u64, message: String) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    }
}

fn optional_number<T: std::str::FromStr>(path: &Path, line: u64, field: &str, column: &str) -> Result<Option<T>> {
    let field = field.trim();
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse()
        .map(Some)
        .map_err(|_| parse_error(path, line, format!("invalid {column} `{field}`")))
}

fn optional_text(field: &str) -> Option<String> {
    let field = field.trim();
    (!field.is_empty()).then(|| field.to_string())
}

/// Read, validate and filter a dataset.
pub fn ingest(manifest: &IngestManifest) -> Result<(Dataset, DatasetSummary)> {
    let apps = Table::read(&manifest.apps)?;
    let (c_id, c_name, c_cat) = (apps.column("app_id")?, apps.column("app_name")?, apps.column("category")?);
    let mut app_index: HashMap<String, usize> = HashMap::new();
    let mut app_ids = Vec::new();
    let mut app_names = Vec::new();
    let mut app_categories = Vec::new();
    for (line, rec) in &apps.rows {
        let id = rec[c_id].trim().to_string();
        if id.is_empty() {
            return Err(parse_error(&apps.path, *line, "empty app_id".into()));
        }
        if app_index.insert(id.clone(), app_ids.len()).is_some() {
            return Err(parse_error(&apps.path, *line, format!("duplicate app id `{id}`")));
        }
        let category = rec[c_cat].trim().to_string();
        if category.is_empty() {
            return Err(parse_error(&apps.path, *line, format!("app `{id}` has no category")));
        }
        app_ids.push(id);
        app_names.push(rec[c_name].trim().to_string());
        app_categories.push(category);
    }

    let users = Table::read(&manifest.users)?;
    let c_user = users.column("user_id")?;
    let schema: Vec<Attribute> = Attribute::ALL
        .into_iter()
        .filter(|a| users.columns.contains_key(a.name()))
        .collect();
    let mut user_index: HashMap<String, usize> = HashMap::new();
    let mut user_ids = Vec::new();
    let mut records = Vec::new();
    for (line, rec) in &users.rows {
        let id = rec[c_user].trim().to_string();
        if id.is_empty() {
            return Err(parse_error(&users.path, *line, "empty user_id".into()));
        }
        if user_index.insert(id.clone(), user_ids.len()).is_some() {
            return Err(parse_error(&users.path, *line, format!("duplicate user id `{id}`")));
        }
        let field = |a: Attribute| users.columns.get(a.name()).map_or("", |&c| &rec[c]);
        let record = DemographicRecord {
            user_row: user_ids.len(),
            gender: optional_text(field(Attribute::Gender)),
            age: optional_number(&users.path, *line, field(Attribute::Age), "age")?,
            race: optional_text(field(Attribute::Race)),
            married: optional_text(field(Attribute::Married)),
            children: optional_number(&users.path, *line, field(Attribute::Children), "children")?,
            income: optional_number(&users.path, *line, field(Attribute::Income), "income")?,
        };
        record
            .validate()
            .map_err(|e| parse_error(&users.path, *line, e.to_string()))?;
        user_ids.push(id);
        records.push(record);
    }

    let usage = Table::read(&manifest.usage)?;
    let (u_user, u_app) = (usage.column("user_id")?, usage.column("app_id")?);
    let mut pairs = Vec::with_capacity(usage.rows.len());
    for (line, rec) in &usage.rows {
        let user = rec[u_user].trim();
        let app = rec[u_app].trim();
        let &i = user_index
            .get(user)
            .ok_or_else(|| parse_error(&usage.path, *line, format!("unknown user id `{user}`")))?;
        let &j = app_index
            .get(app)
            .ok_or_else(|| parse_error(&usage.path, *line, format!("unknown app id `{app}`")))?;
        pairs.push((i, j));
    }

    let matrix = SparseBinaryMatrix::from_triplets(&pairs, user_ids.len(), app_ids.len())?;
    let mut dataset = Dataset {
        matrix,
        user_ids,
        app_ids,
        app_names,
        categories: CategoryMap::from_labels(&app_categories)?,
        records,
        schema,
    };
    let (dropped_apps, dropped_users) = dataset.apply_filters(manifest.min_users_per_app)?;
    if dataset.n_users() == 0 || dataset.n_apps() == 0 {
        return Err(Error::Data(format!(
            "no data left after filtering ({} users, {} apps)",
            dataset.n_users(),
            dataset.n_apps()
        )));
    }
    let summary = DatasetSummary {
        dropped_apps,
        dropped_users,
        ..dataset.summary()
    };
    Ok((dataset, summary))
}
