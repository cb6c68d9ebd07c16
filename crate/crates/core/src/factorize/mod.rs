//! Low-rank refinement of the pre-imputed matrix.
//!
//! Non-negative data goes through NMF, anything else through a truncated
//! SVD. Both produce a reconstruction that is either spliced into the
//! missing positions only or used wholesale.

mod nmf;
mod svd;

pub use nmf::{frobenius_sq, nmf, NmfFactors, DEFAULT_MAX_ITER, DEFAULT_TOL, NMF_EPS};
pub use svd::{singular_values, thin_svd, truncated_svd, SvdFactors};

use ndarray::{Array2, ArrayView2};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FactorMethod {
    Nmf,
    Svd,
}

#[derive(Debug, Clone)]
pub struct FactorizationOutput {
    /// Observed entries kept, missing entries taken from the reconstruction.
    pub nan_replaced: Array2<f64>,
    /// The reconstruction everywhere.
    pub fully_transformed: Array2<f64>,
    pub method: FactorMethod,
    pub rank: usize,
}

/// Share of spectral energy the chosen rank must capture.
pub const RANK_ENERGY: f64 = 0.9;
pub const MAX_RANK: usize = 50;

/// Smallest rank capturing 90% of the squared singular values, clamped to
/// `[2, min(n, m, 50)]`.
pub fn choose_rank(x: ArrayView2<f64>) -> usize {
    let (n, m) = x.dim();
    let ceiling = n.min(m).clamp(1, MAX_RANK);
    let energy: Vec<f64> = singular_values(x).iter().map(|s| s * s).collect();
    let total: f64 = energy.iter().sum();
    let target = RANK_ENERGY * total * (1.0 - 1e-12);
    let mut acc = 0.0;
    let mut rank = energy.len();
    for (i, e) in energy.iter().enumerate() {
        acc += e;
        if acc >= target {
            rank = i + 1;
            break;
        }
    }
    rank.max(2).min(ceiling)
}

/// Factorize `preimputed` and splice the reconstruction into the gaps of
/// `encoded` (NaN = missing).
pub fn adaptive_factorize(encoded: ArrayView2<f64>, preimputed: ArrayView2<f64>, seed: u64) -> Result<FactorizationOutput> {
    if encoded.dim() != preimputed.dim() {
        return Err(Error::Shape(format!(
            "encoded is {:?} but preimputed is {:?}",
            encoded.dim(),
            preimputed.dim()
        )));
    }
    if preimputed.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("preimputed matrix must be dense and finite".into()));
    }
    let rank = choose_rank(preimputed);
    let nonneg = preimputed.iter().all(|&v| v >= 0.0);
    let (method, full) = if nonneg {
        let f = nmf(preimputed, rank, DEFAULT_MAX_ITER, DEFAULT_TOL, seed)?;
        (FactorMethod::Nmf, f.reconstruct())
    } else {
        (FactorMethod::Svd, truncated_svd(preimputed, rank)?.reconstruct())
    };
    let mut nan_replaced = preimputed.to_owned();
    ndarray::Zip::from(&mut nan_replaced)
        .and(&encoded)
        .and(&full)
        .for_each(|out, &e, &r| {
            if e.is_nan() {
                *out = r;
            }
        });
    Ok(FactorizationOutput {
        nan_replaced,
        fully_transformed: full,
        method,
        rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn rank_heuristic() {
        let u = array![[1.0], [2.0], [3.0], [4.0]];
        let v = array![[1.0, 0.5, 2.0, 1.0]];
        assert_eq!(choose_rank(u.dot(&v).view()), 2);
        assert_eq!(choose_rank(Array2::<f64>::eye(10).view()), 9);
        assert!(choose_rank(Array2::<f64>::eye(3).view()) <= 3);
        assert_eq!(choose_rank(array![[1.0, 2.0, 3.0]].view()), 1);
    }

    #[test]
    fn dispatch_on_sign() {
        let pre = array![[1.0, 2.0, 0.5], [0.3, 1.0, 2.0], [2.0, 0.1, 1.0], [1.0, 1.0, 1.0]];
        let mut enc = pre.clone();
        enc[[1, 1]] = f64::NAN;
        let out = adaptive_factorize(enc.view(), pre.view(), 1).unwrap();
        assert_eq!(out.method, FactorMethod::Nmf);
        assert!(out.fully_transformed.iter().all(|&v| v >= 0.0));
        for ((i, j), &v) in enc.indexed_iter() {
            if v.is_nan() {
                assert_eq!(out.nan_replaced[[i, j]], out.fully_transformed[[i, j]]);
            } else {
                assert_eq!(out.nan_replaced[[i, j]], v);
            }
        }

        let mut neg = pre.clone();
        neg[[0, 0]] = -0.5;
        let out = adaptive_factorize(neg.view(), neg.view(), 1).unwrap();
        assert_eq!(out.method, FactorMethod::Svd);
        assert_eq!(out.nan_replaced, neg);
    }

    #[test]
    fn shape_mismatch() {
        let a = Array2::<f64>::zeros((3, 2));
        let b = Array2::<f64>::zeros((2, 3));
        assert!(matches!(adaptive_factorize(a.view(), b.view(), 0), Err(Error::Shape(_))));
    }
}
