//! Compressed sparse row storage for binary incidence matrices.
//!
//! Rows are users, columns are apps, and every stored entry is an implicit 1
//! ("used at least once"). There is no value array.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which axis an operation addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Rows,
    Cols,
}

/// Row-major matrix interface shared by the sparse and dense feature paths.
///
/// The logistic model only needs `X·v` and `Xᵀ·u`, so any feature
/// representation implementing these can be trained on.
pub trait FeatureMatrix: Sync {
    fn n_rows(&self) -> usize;
    fn n_cols(&self) -> usize;

    /// `out[i] = Σ_j X[i][j]·v[j]`; `out` is overwritten.
    fn matvec_into(&self, v: &[f64], out: &mut [f64]) -> Result<()>;

    /// `out[j] = Σ_i X[i][j]·u[i]`; `out` is overwritten.
    fn transpose_matvec_into(&self, u: &[f64], out: &mut [f64]) -> Result<()>;

    /// Submatrix holding `rows`, in that order.
    fn select_rows(&self, rows: &[usize]) -> Result<Self>
    where
        Self: Sized;

    fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n_rows()];
        self.matvec_into(v, &mut out)?;
        Ok(out)
    }

    fn transpose_matvec(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n_cols()];
        self.transpose_matvec_into(u, &mut out)?;
        Ok(out)
    }
}

pub(crate) fn check_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        })
    }
}

/// Users × apps incidence matrix in CSR form with implicit unit entries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseBinaryMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<u32>,
    col_indices: Vec<u32>,
}

impl SparseBinaryMatrix {
    /// Empty (all-zero) matrix of the given shape.
    pub fn zeros(n_rows: usize, n_cols: usize) -> Result<Self> {
        Self::check_dims(n_rows, n_cols, 0)?;
        Ok(Self {
            n_rows,
            n_cols,
            row_offsets: vec![0; n_rows + 1],
            col_indices: Vec::new(),
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
        Self::from_triplets(&pairs, n, n)
    }

    /// Build from `(row, col)` pairs. Duplicates collapse to one entry.
    pub fn from_triplets(pairs: &[(usize, usize)], n_rows: usize, n_cols: usize) -> Result<Self> {
        for &(r, c) in pairs {
            if r >= n_rows || c >= n_cols {
                return Err(Error::IndexOutOfRange(format!(
                    "pair ({r}, {c}) outside a {n_rows}x{n_cols} matrix"
                )));
            }
        }
        Self::check_dims(n_rows, n_cols, pairs.len())?;

        let mut counts = vec![0u32; n_rows + 1];
        for &(r, _) in pairs {
            counts[r + 1] += 1;
        }
        for i in 0..n_rows {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut cols = vec![0u32; pairs.len()];
        for &(r, c) in pairs {
            cols[fill[r] as usize] = c as u32;
            fill[r] += 1;
        }

        let mut row_offsets = Vec::with_capacity(n_rows + 1);
        let mut col_indices = Vec::with_capacity(pairs.len());
        row_offsets.push(0u32);
        for i in 0..n_rows {
            let row = &mut cols[counts[i] as usize..counts[i + 1] as usize];
            row.sort_unstable();
            let mut last = None;
            for &c in row.iter() {
                if last != Some(c) {
                    col_indices.push(c);
                    last = Some(c);
                }
            }
            row_offsets.push(col_indices.len() as u32);
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
        })
    }

    /// Build from per-row column lists; each list is sorted and deduplicated.
    pub fn from_rows<I, R>(rows: I, n_cols: usize) -> Result<Self>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = usize>,
    {
        let mut row_offsets = vec![0u32];
        let mut col_indices: Vec<u32> = Vec::new();
        let mut scratch: Vec<usize> = Vec::new();
        for (i, row) in rows.into_iter().enumerate() {
            scratch.clear();
            scratch.extend(row);
            scratch.sort_unstable();
            scratch.dedup();
            if let Some(&c) = scratch.last() {
                if c >= n_cols {
                    return Err(Error::IndexOutOfRange(format!(
                        "pair ({i}, {c}) outside {n_cols} columns"
                    )));
                }
            }
            col_indices.extend(scratch.iter().map(|&c| c as u32));
            if col_indices.len() > u32::MAX as usize {
                return Err(Error::InvalidArgument("more than u32::MAX entries".into()));
            }
            row_offsets.push(col_indices.len() as u32);
        }
        let n_rows = row_offsets.len() - 1;
        Self::check_dims(n_rows, n_cols, col_indices.len())?;
        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
        })
    }

    fn check_dims(n_rows: usize, n_cols: usize, nnz: usize) -> Result<()> {
        let limit = u32::MAX as usize;
        if n_rows > limit || n_cols > limit || nnz > limit {
            return Err(Error::InvalidArgument(format!(
                "matrix {n_rows}x{n_cols} with {nnz} entries exceeds 32-bit indexing"
            )));
        }
        Ok(())
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn row_offsets(&self) -> &[u32] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[u32] {
        &self.col_indices
    }

    /// Sorted column indices of row `i`.
    pub fn row(&self, i: usize) -> &[u32] {
        &self.col_indices[self.row_offsets[i] as usize..self.row_offsets[i + 1] as usize]
    }

    /// Number of entries in row `i` (the user's app count).
    pub fn row_nnz(&self, i: usize) -> usize {
        (self.row_offsets[i + 1] - self.row_offsets[i]) as usize
    }

    pub fn row_counts(&self) -> Vec<usize> {
        (0..self.n_rows).map(|i| self.row_nnz(i)).collect()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i < self.n_rows && self.row(i).binary_search(&(j as u32)).is_ok()
    }

    /// All stored `(row, col)` pairs in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_rows).flat_map(move |i| self.row(i).iter().map(move |&c| (i, c as usize)))
    }

    /// Number of rows containing each column.
    pub fn column_support(&self) -> Vec<usize> {
        let mut support = vec![0usize; self.n_cols];
        for &c in &self.col_indices {
            support[c as usize] += 1;
        }
        support
    }

    /// Dense 0/1 copy, row-major.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, j) in self.entries() {
            out[i][j] = 1.0;
        }
        out
    }

    /// Submatrix keeping `keep` along `axis`, renumbered in the order given.
    pub fn select(&self, axis: Axis, keep: &[usize]) -> Result<Self> {
        let bound = match axis {
            Axis::Rows => self.n_rows,
            Axis::Cols => self.n_cols,
        };
        let mut seen = vec![false; bound];
        for &k in keep {
            if k >= bound {
                return Err(Error::IndexOutOfRange(format!(
                    "index {k} out of range for axis of length {bound}"
                )));
            }
            if seen[k] {
                return Err(Error::InvalidArgument(format!("duplicated index {k} in selection")));
            }
            seen[k] = true;
        }

        match axis {
            Axis::Rows => {
                let mut row_offsets = Vec::with_capacity(keep.len() + 1);
                let mut col_indices = Vec::new();
                row_offsets.push(0u32);
                for &r in keep {
                    col_indices.extend_from_slice(self.row(r));
                    row_offsets.push(col_indices.len() as u32);
                }
                Ok(Self {
                    n_rows: keep.len(),
                    n_cols: self.n_cols,
                    row_offsets,
                    col_indices,
                })
            }
            Axis::Cols => {
                let mut remap = vec![u32::MAX; self.n_cols];
                for (new, &old) in keep.iter().enumerate() {
                    remap[old] = new as u32;
                }
                // Output order must follow `keep`, which may not be ascending.
                let ascending = keep.windows(2).all(|w| w[0] < w[1]);
                let mut row_offsets = Vec::with_capacity(self.n_rows + 1);
                let mut col_indices = Vec::new();
                row_offsets.push(0u32);
                for i in 0..self.n_rows {
                    let start = col_indices.len();
                    col_indices.extend(
                        self.row(i)
                            .iter()
                            .map(|&c| remap[c as usize])
                            .filter(|&c| c != u32::MAX),
                    );
                    if !ascending {
                        col_indices[start..].sort_unstable();
                    }
                    row_offsets.push(col_indices.len() as u32);
                }
                Ok(Self {
                    n_rows: self.n_rows,
                    n_cols: keep.len(),
                    row_offsets,
                    col_indices,
                })
            }
        }
    }
}

impl FeatureMatrix for SparseBinaryMatrix {
    fn n_rows(&self) -> usize {
        self.n_rows
    }

    fn n_cols(&self) -> usize {
        self.n_cols
    }

    fn matvec_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        check_len("matvec input", self.n_cols, v.len())?;
        check_len("matvec output", self.n_rows, out.len())?;
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().map(|&j| v[j as usize]).sum();
        }
        Ok(())
    }

    fn transpose_matvec_into(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        check_len("transpose_matvec input", self.n_rows, u.len())?;
        check_len("transpose_matvec output", self.n_cols, out.len())?;
        out.fill(0.0);
        for (i, &ui) in u.iter().enumerate() {
            for &j in self.row(i) {
                out[j as usize] += ui;
            }
        }
        Ok(())
    }

    fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        self.select(Axis::Rows, rows)
    }
}
