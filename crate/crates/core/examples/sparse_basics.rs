//! Build a users × apps matrix and slice it.

use appdemog::{Axis, FeatureMatrix, SparseBinaryMatrix};

fn main() -> appdemog::Result<()> {
    let usage = [(0, 0), (0, 2), (1, 1), (2, 0), (2, 1), (2, 3)];
    let x = SparseBinaryMatrix::from_triplets(&usage, 3, 4)?;
    println!("{} users, {} apps, {} entries", x.n_rows(), x.n_cols(), x.nnz());
    println!("apps per user: {:?}", x.row_counts());
    println!("users per app: {:?}", x.column_support());

    let popular: Vec<usize> = x.column_support().iter().enumerate().filter(|(_, &n)| n >= 2).map(|(j, _)| j).collect();
    let sub = x.select(Axis::Cols, &popular)?;
    for row in sub.to_dense() {
        println!("{row:?}");
    }
    Ok(())
}
