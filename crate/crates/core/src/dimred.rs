//! Dimensionality reduction of the app matrix: a frequency threshold on
//! columns, aggregation of apps into category counts, and a randomized
//! truncated SVD.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dense::DenseFeatureMatrix;
use crate::error::{Error, Result};
use crate::rng;
use crate::sparse::{check_len, FeatureMatrix, SparseBinaryMatrix};

/// Columns whose support is at least `ceil(min_share · n_rows)`, ascending.
pub fn frequency_filter(x: &SparseBinaryMatrix, min_share: f64) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&min_share) {
        return Err(Error::InvalidArgument(format!("min_share {min_share} outside [0, 1]")));
    }
    let needed = min_support(min_share, x.n_rows());
    Ok(x.column_support()
        .into_iter()
        .enumerate()
        .filter(|&(_, s)| s >= needed)
        .map(|(j, _)| j)
        .collect())
}

/// `ceil(share · n)`, ignoring representation error in `share` (so that
/// `0.1 · 3760` is 376, not 377).
pub fn min_support(share: f64, n: usize) -> usize {
    let raw = share * n as f64;
    let rounded = raw.round();
    if (raw - rounded).abs() <= 1e-9 * raw.abs().max(1.0) {
        rounded as usize
    } else {
        raw.ceil() as usize
    }
}

/// Category of every app.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryMap {
    pub app_category: Vec<usize>,
    pub names: Vec<String>,
}

impl CategoryMap {
    pub fn new(app_category: Vec<usize>, names: Vec<String>) -> Result<Self> {
        if let Some((app, &c)) = app_category.iter().enumerate().find(|(_, &c)| c >= names.len()) {
            return Err(Error::Data(format!("app {app} has unknown category id {c}")));
        }
        Ok(Self { app_category, names })
    }

    /// Build from one category label per app; ids follow the sorted distinct
    /// labels. An empty label means the app has no category.
    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        if let Some(app) = labels.iter().position(|l| l.as_ref().trim().is_empty()) {
            return Err(Error::Data(format!("app {app} has no category")));
        }
        let mut names: Vec<String> = labels.iter().map(|l| l.as_ref().to_string()).collect();
        names.sort();
        names.dedup();
        let app_category = labels
            .iter()
            .map(|l| names.binary_search_by(|n| n.as_str().cmp(l.as_ref())).unwrap())
            .collect();
        Ok(Self { app_category, names })
    }

    pub fn n_apps(&self) -> usize {
        self.app_category.len()
    }

    pub fn n_categories(&self) -> usize {
        self.names.len()
    }

    pub fn label(&self, app: usize) -> &str {
        &self.names[self.app_category[app]]
    }

    /// Restrict to the given apps, keeping category ids.
    pub fn select(&self, apps: &[usize]) -> Self {
        Self {
            app_category: apps.iter().map(|&a| self.app_category[a]).collect(),
            names: self.names.clone(),
        }
    }
}

/// Per-user app counts in each category.
pub fn category_aggregate(x: &SparseBinaryMatrix, cmap: &CategoryMap) -> Result<DenseFeatureMatrix> {
    if cmap.n_apps() != x.n_cols() {
        return Err(Error::Data(format!(
            "category map covers {} apps but the matrix has {}",
            cmap.n_apps(),
            x.n_cols()
        )));
    }
    let mut out = DenseFeatureMatrix::zeros(x.n_rows(), cmap.n_categories());
    for i in 0..x.n_rows() {
        let row = out.row_mut(i);
        for &j in x.row(i) {
            row[cmap.app_category[j as usize]] += 1.0;
        }
    }
    Ok(out)
}

/// Randomized range-finder settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdOptions {
    pub oversampling: usize,
    /// Power iterations always performed.
    pub power_iterations: usize,
    /// Further subspace iterations run until the leading `k` Ritz values
    /// move by less than this, relative.
    pub tolerance: f64,
    pub max_power_iterations: usize,
}

impl Default for SvdOptions {
    fn default() -> Self {
        Self {
            oversampling: 10,
            power_iterations: 2,
            tolerance: 1e-12,
            max_power_iterations: 500,
        }
    }
}

impl SvdOptions {
    /// Exactly the fixed number of power iterations, no refinement.
    pub fn fixed(oversampling: usize, power_iterations: usize) -> Self {
        Self {
            oversampling,
            power_iterations,
            tolerance: f64::INFINITY,
            max_power_iterations: power_iterations,
        }
    }
}

/// Leading singular values and right singular vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdFactors {
    pub k: usize,
    pub n_cols: usize,
    pub singular_values: Vec<f64>,
    /// `k` rows of length `n_cols`, orthonormal.
    pub right_vectors: Vec<Vec<f64>>,
    pub power_iterations: usize,
}

pub fn truncated_svd(x: &SparseBinaryMatrix, k: usize, seed: u64) -> Result<SvdFactors> {
    truncated_svd_with(x, k, seed, &SvdOptions::default())
}

pub fn truncated_svd_with(x: &SparseBinaryMatrix, k: usize, seed: u64, opts: &SvdOptions) -> Result<SvdFactors> {
    let (m, n) = (x.n_rows(), x.n_cols());
    if k == 0 || k > m.min(n) {
        return Err(Error::InvalidArgument(format!(
            "k = {k} outside [1, {}] for a {m}x{n} matrix",
            m.min(n)
        )));
    }
    let p = (k + opts.oversampling).min(m.min(n));

    let mut rng = rng::seeded(seed);
    let omega = DMatrix::<f64>::from_fn(n, p, |_, _| StandardNormal.sample(&mut rng));
    let mut q = orthonormalize(sparse_times(x, &omega));

    let mut previous: Option<Vec<f64>> = None;
    let mut iterations = 0;
    while iterations < opts.max_power_iterations.max(opts.power_iterations) {
        let z = orthonormalize(sparse_t_times(x, &q));
        let y = sparse_times(x, &z);
        let qr = y.qr();
        let ritz = sorted_singular_values(&qr.r());
        q = qr.q();
        iterations += 1;

        let ritz = ritz[..k].to_vec();
        if iterations >= opts.power_iterations {
            if let Some(prev) = &previous {
                let scale = ritz[0].max(f64::MIN_POSITIVE);
                let moved = ritz.iter().zip(prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                if moved <= opts.tolerance * scale {
                    break;
                }
            }
        }
        previous = Some(ritz);
    }

    // B = Qᵀ X, p × n; its SVD gives the right factors of X.
    let b = sparse_t_times(x, &q).transpose();
    let svd = b.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::Numerical("SVD failed to produce right vectors".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]).then(a.cmp(&b)));

    let singular_values: Vec<f64> = order[..k].iter().map(|&c| svd.singular_values[c].max(0.0)).collect();
    let right_vectors: Vec<Vec<f64>> = order[..k].iter().map(|&c| v_t.row(c).iter().copied().collect()).collect();
    if singular_values.iter().chain(right_vectors.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite value in truncated SVD".into()));
    }
    Ok(SvdFactors {
        k,
        n_cols: n,
        singular_values,
        right_vectors,
        power_iterations: iterations,
    })
}

fn orthonormalize(a: DMatrix<f64>) -> DMatrix<f64> {
    a.qr().q()
}

fn sorted_singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = a.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// `X · A` for dense `A` (n_cols × c).
fn sparse_times(x: &SparseBinaryMatrix, a: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::<f64>::zeros(x.n_rows(), a.ncols());
    for c in 0..a.ncols() {
        let col = a.column(c);
        for i in 0..x.n_rows() {
            out[(i, c)] = x.row(i).iter().map(|&j| col[j as usize]).sum();
        }
    }
    out
}

/// `Xᵀ · A` for dense `A` (n_rows × c).
fn sparse_t_times(x: &SparseBinaryMatrix, a: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::<f64>::zeros(x.n_cols(), a.ncols());
    for c in 0..a.ncols() {
        let col = a.column(c);
        let mut target = out.column_mut(c);
        for i in 0..x.n_rows() {
            let v = col[i];
            for &j in x.row(i) {
                target[j as usize] += v;
            }
        }
    }
    out
}

/// `X · Vᵀ`, the users' coordinates in the leading right singular directions.
pub fn project(factors: &SvdFactors, x: &SparseBinaryMatrix) -> Result<DenseFeatureMatrix> {
    check_len("SVD factors vs matrix columns", factors.n_cols, x.n_cols())?;
    let k = factors.k;
    let mut out = DenseFeatureMatrix::zeros(x.n_rows(), k);
    for i in 0..x.n_rows() {
        let row = out.row_mut(i);
        for (c, v) in factors.right_vectors.iter().enumerate() {
            row[c] = x.row(i).iter().map(|&j| v[j as usize]).sum();
        }
    }
    Ok(out)
}

/// `‖X − X·VᵀV‖_F`, the error of the rank-k approximation spanned by the
/// factors.
pub fn reconstruction_error(factors: &SvdFactors, x: &SparseBinaryMatrix) -> Result<f64> {
    let proj = project(factors, x)?;
    let captured: f64 = proj.as_slice().iter().map(|v| v * v).sum();
    Ok((x.nnz() as f64 - captured).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_filter_examples() {
        let pairs: Vec<(usize, usize)> = (0..10)
            .flat_map(|i| {
                let mut v = Vec::new();
                if i < 1 {
                    v.push((i, 0));
                }
                if i < 5 {
                    v.push((i, 1));
                }
                if i < 9 {
                    v.push((i, 2));
                }
                v.push((i, 3));
                v
            })
            .collect();
        let x = SparseBinaryMatrix::from_triplets(&pairs, 10, 4).unwrap();
        assert_eq!(x.column_support(), vec![1, 5, 9, 10]);
        assert_eq!(frequency_filter(&x, 0.5).unwrap(), vec![1, 2, 3]);
        assert_eq!(frequency_filter(&x, 0.0).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(frequency_filter(&x, 1.0).unwrap(), vec![3]);
        assert!(frequency_filter(&x, 1.5).is_err());
        let mut last = 4;
        for s in [0.0, 0.1, 0.3, 0.5, 0.7, 0.95, 1.0] {
            let n = frequency_filter(&x, s).unwrap().len();
            assert!(n <= last);
            last = n;
        }
    }

    #[test]
    fn min_support_ignores_representation_error() {
        assert_eq!(min_support(0.1, 3760), 376);
        assert_eq!(min_support(0.1, 3761), 377);
        assert_eq!(min_support(0.0, 10), 0);
        assert_eq!(min_support(0.5, 10), 5);
    }

    #[test]
    fn category_examples() {
        let x = SparseBinaryMatrix::from_triplets(&[(0, 0), (0, 2), (1, 1), (2, 0), (2, 1), (2, 2)], 3, 3).unwrap();
        let own = CategoryMap::new(vec![0, 1, 2], vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let agg = category_aggregate(&x, &own).unwrap();
        assert_eq!(agg, DenseFeatureMatrix::from_sparse(&x));

        let one = CategoryMap::new(vec![0; 3], vec!["all".into()]).unwrap();
        let agg = category_aggregate(&x, &one).unwrap();
        assert_eq!(agg.as_slice(), &[2.0, 1.0, 3.0]);

        let short = CategoryMap::new(vec![0; 2], vec!["all".into()]).unwrap();
        assert!(category_aggregate(&x, &short).is_err());
        assert!(CategoryMap::new(vec![1], vec!["a".into()]).is_err());
    }

    #[test]
    fn from_labels_sorts_names() {
        let c = CategoryMap::from_labels(&["games", "tools", "games", "arcade"]).unwrap();
        assert_eq!(c.names, vec!["arcade", "games", "tools"]);
        assert_eq!(c.app_category, vec![1, 2, 1, 0]);
        assert_eq!(c.label(1), "tools");
        assert!(CategoryMap::from_labels(&["a", ""]).is_err());
    }

    #[test]
    fn svd_identity_and_rank_one() {
        let id = SparseBinaryMatrix::identity(5).unwrap();
        let f = truncated_svd(&id, 5, 1).unwrap();
        for s in &f.singular_values {
            assert!((s - 1.0).abs() < 1e-12);
        }
        let proj = project(&f, &id).unwrap();
        for i in 0..5 {
            let norm: f64 = proj.row(i).iter().map(|v| v * v).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }

        let pairs: Vec<_> = (0..4).flat_map(|i| (0..6).map(move |j| (i, j))).collect();
        let ones = SparseBinaryMatrix::from_triplets(&pairs, 4, 6).unwrap();
        let f = truncated_svd(&ones, 2, 3).unwrap();
        assert!((f.singular_values[0] - 24f64.sqrt()).abs() < 1e-12);
        assert!(f.singular_values[1].abs() < 1e-10);
        assert!(reconstruction_error(&f, &ones).unwrap() < 1e-6);
    }

    #[test]
    fn svd_rejects_bad_k() {
        let id = SparseBinaryMatrix::identity(3).unwrap();
        assert!(truncated_svd(&id, 0, 0).is_err());
        assert!(truncated_svd(&id, 4, 0).is_err());
    }

    #[test]
    fn zero_row_projects_to_zero() {
        let x = SparseBinaryMatrix::from_triplets(&[(0, 0), (0, 1), (2, 1)], 3, 2).unwrap();
        let f = truncated_svd(&x, 1, 0).unwrap();
        let p = project(&f, &x).unwrap();
        assert_eq!(p.row(1), &[0.0]);
        assert!(project(&f, &SparseBinaryMatrix::zeros(1, 3).unwrap()).is_err());
    }

    #[test]
    fn svd_is_deterministic() {
        let pairs: Vec<_> = (0..20).flat_map(|i| (0..15).filter(move |j| (i * 7 + j * 3) % 5 < 2).map(move |j| (i, j))).collect();
        let x = SparseBinaryMatrix::from_triplets(&pairs, 20, 15).unwrap();
        assert_eq!(truncated_svd(&x, 4, 9).unwrap(), truncated_svd(&x, 4, 9).unwrap());
    }
}
