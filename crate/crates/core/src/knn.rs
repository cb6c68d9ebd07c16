//! Nearest-neighbour filling with a missing-aware Euclidean distance.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Output of a KNN fill.
#[derive(Debug, Clone)]
pub struct KnnImputed {
    pub values: Array2<f64>,
    /// Entries that had no eligible neighbour and got the column mean.
    pub fallbacks: Vec<(usize, usize)>,
}

/// Distance between two rows over their commonly observed columns.
///
/// The squared sum is rescaled by `total / shared` so rows with different
/// overlap are comparable. Returns `None` when nothing is shared.
pub fn nan_euclidean(a: &[f64], b: &[f64]) -> Option<f64> {
    let mut shared = 0usize;
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b) {
        if !x.is_nan() && !y.is_nan() {
            shared += 1;
            sum += (x - y) * (x - y);
        }
    }
    (shared > 0).then(|| (a.len() as f64 / shared as f64 * sum).sqrt())
}

/// Fill every NaN entry from the mean of its `k` nearest rows.
pub fn knn_impute(matrix: ArrayView2<f64>, k: usize) -> Result<KnnImputed> {
    knn_impute_columns(matrix, k, &vec![true; matrix.ncols()])
}

/// Fill NaN entries only in columns flagged in `targets`.
///
/// Distances still use every column. Neighbours for entry `(i, j)` are the
/// other rows with column `j` observed and at least one column shared with
/// row `i`; ties in distance go to the lower row index.
pub fn knn_impute_columns(matrix: ArrayView2<f64>, k: usize, targets: &[bool]) -> Result<KnnImputed> {
    let (n, m) = matrix.dim();
    if targets.len() != m {
        return Err(Error::Shape(format!("{} target flags for {m} columns", targets.len())));
    }
    if k == 0 || k >= n {
        return Err(Error::range("k", k, format!("1..{}", n.saturating_sub(1))));
    }
    let rows: Vec<Vec<f64>> = matrix.rows().into_iter().map(|r| r.to_vec()).collect();
    let means: Vec<f64> = (0..m).map(|j| column_mean(matrix, j).unwrap_or(0.0)).collect();

    let fills: Vec<Vec<(usize, f64, bool)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let wanted: Vec<usize> = (0..m)
                .filter(|&j| targets[j] && rows[i][j].is_nan())
                .collect();
            if wanted.is_empty() {
                return Vec::new();
            }
            let dist: Vec<Option<f64>> = (0..n)
                .map(|r| if r == i { None } else { nan_euclidean(&rows[i], &rows[r]) })
                .collect();
            wanted
                .into_iter()
                .map(|j| {
                    let mut cands: Vec<(f64, usize)> = (0..n)
                        .filter(|&r| !rows[r][j].is_nan())
                        .filter_map(|r| dist[r].map(|d| (d, r)))
                        .collect();
                    if cands.is_empty() {
                        return (j, means[j], true);
                    }
                    cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                    cands.truncate(k);
                    let mut picked: Vec<usize> = cands.iter().map(|c| c.1).collect();
                    picked.sort_unstable();
                    let sum: f64 = picked.iter().map(|&r| rows[r][j]).sum();
                    (j, sum / picked.len() as f64, false)
                })
                .collect()
        })
        .collect();

    let mut values = matrix.to_owned();
    let mut fallbacks = Vec::new();
    for (i, row_fills) in fills.into_iter().enumerate() {
        for (j, v, fell_back) in row_fills {
            values[[i, j]] = v;
            if fell_back {
                fallbacks.push((i, j));
            }
        }
    }
    if !fallbacks.is_empty() {
        log::warn!("{} entries had no eligible neighbour; used column means", fallbacks.len());
    }
    Ok(KnnImputed { values, fallbacks })
}

/// Arithmetic mean of the non-NaN entries of column `j`, summed top to bottom.
pub fn column_mean(matrix: ArrayView2<f64>, j: usize) -> Option<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for &v in matrix.column(j) {
        if !v.is_nan() {
            sum += v;
            count += 1;
        }
    }
    (count > 0).then(|| sum / count as f64)
}
