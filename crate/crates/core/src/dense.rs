//! Row-major dense feature matrix, the output of category aggregation and
//! SVD projection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{check_len, FeatureMatrix, SparseBinaryMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseFeatureMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl DenseFeatureMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn from_row_major(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self> {
        check_len("dense data", n_rows * n_cols, data.len())?;
        if let Some(bad) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::Numerical(format!("non-finite dense entry at offset {bad}")));
        }
        Ok(Self { n_rows, n_cols, data })
    }

    /// Dense 0/1 copy of a sparse binary matrix.
    pub fn from_sparse(m: &SparseBinaryMatrix) -> Self {
        let mut out = Self::zeros(m.n_rows(), m.n_cols());
        for (i, j) in m.entries() {
            out.data[i * m.n_cols() + j] = 1.0;
        }
        out
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

impl FeatureMatrix for DenseFeatureMatrix {
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
            // Zero entries are skipped so a dense copy of a binary matrix sums
            // exactly the same terms, in the same order, as the sparse path.
            *o = self
                .row(i)
                .iter()
                .zip(v)
                .filter(|(x, _)| **x != 0.0)
                .map(|(x, w)| x * w)
                .sum();
        }
        Ok(())
    }

    fn transpose_matvec_into(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        check_len("transpose_matvec input", self.n_rows, u.len())?;
        check_len("transpose_matvec output", self.n_cols, out.len())?;
        out.fill(0.0);
        for (i, &ui) in u.iter().enumerate() {
            for (o, &x) in out.iter_mut().zip(self.row(i)) {
                if x != 0.0 {
                    *o += x * ui;
                }
            }
        }
        Ok(())
    }

    fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * self.n_cols);
        for &r in rows {
            if r >= self.n_rows {
                return Err(Error::IndexOutOfRange(format!(
                    "row {r} out of range for {} rows",
                    self.n_rows
                )));
            }
            data.extend_from_slice(self.row(r));
        }
        Ok(Self {
            n_rows: rows.len(),
            n_cols: self.n_cols,
            data,
        })
    }
}
