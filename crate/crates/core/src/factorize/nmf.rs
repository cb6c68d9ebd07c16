//! Non-negative matrix factorization by multiplicative updates.

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Guard added to every update denominator.
pub const NMF_EPS: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 500;
pub const DEFAULT_TOL: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct NmfFactors {
    /// n × r, non-negative.
    pub w: Array2<f64>,
    /// r × m, non-negative.
    pub h: Array2<f64>,
    /// ‖X − WH‖²_F at initialization and after every iteration.
    pub objective_trace: Vec<f64>,
}

impl NmfFactors {
    pub fn reconstruct(&self) -> Array2<f64> {
        self.w.dot(&self.h)
    }
}

pub fn frobenius_sq(x: ArrayView2<f64>, w: &Array2<f64>, h: &Array2<f64>) -> f64 {
    let wh = w.dot(h);
    x.iter().zip(wh.iter()).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Fit `X ≈ WH` minimizing the squared Frobenius error.
///
/// Lee–Seung updates, H then W each iteration. Stops when the relative
/// decrease of the objective falls below `tol` or after `max_iter` rounds.
/// Factors start from seeded uniform(0, 1) draws scaled by `sqrt(mean(X)/r)`.
pub fn nmf(x: ArrayView2<f64>, rank: usize, max_iter: usize, tol: f64, seed: u64) -> Result<NmfFactors> {
    let (n, m) = x.dim();
    if rank == 0 || rank > n.min(m) {
        return Err(Error::range("rank", rank, format!("1..={}", n.min(m))));
    }
    if let Some(&neg) = x.iter().find(|&&v| v < 0.0) {
        return Err(Error::NegativeEntry(neg));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("non-finite entry in NMF input".into()));
    }

    let mean = x.sum() / (n * m) as f64;
    let scale = (mean / rank as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = Array2::from_shape_simple_fn((n, rank), || rng.random::<f64>() * scale);
    let mut h = Array2::from_shape_simple_fn((rank, m), || rng.random::<f64>() * scale);

    let mut trace = Vec::with_capacity(max_iter.min(10_000) + 1);
    let mut prev = frobenius_sq(x, &w, &h);
    trace.push(prev);
    for _ in 0..max_iter {
        if prev == 0.0 {
            break;
        }
        let num = w.t().dot(&x);
        let den = w.t().dot(&w).dot(&h);
        ndarray::Zip::from(&mut h)
            .and(&num)
            .and(&den)
            .for_each(|h, &a, &b| *h *= a / (b + NMF_EPS));

        let num = x.dot(&h.t());
        let den = w.dot(&h.dot(&h.t()));
        ndarray::Zip::from(&mut w)
            .and(&num)
            .and(&den)
            .for_each(|w, &a, &b| *w *= a / (b + NMF_EPS));

        let cur = frobenius_sq(x, &w, &h);
        trace.push(cur);
        let rel = (prev - cur) / prev;
        prev = cur;
        if rel < tol {
            break;
        }
    }
    Ok(NmfFactors {
        w,
        h,
        objective_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_nonneg(n: usize, m: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_simple_fn((n, m), || rng.random::<f64>())
    }

    #[test]
    fn recovers_exact_low_rank() {
        let w0 = random_nonneg(20, 2, 1);
        let h0 = random_nonneg(2, 10, 2);
        let x = w0.dot(&h0);
        let f = nmf(x.view(), 2, 2000, 0.0, 7).unwrap();
        let norm = x.mapv(|v| v * v).sum();
        assert!(*f.objective_trace.last().unwrap() <= 1e-6 * norm);
    }

    #[test]
    fn zero_matrix() {
        let x = Array2::<f64>::zeros((4, 3));
        let f = nmf(x.view(), 2, 50, 1e-4, 0).unwrap();
        assert_eq!(f.objective_trace, vec![0.0]);
        assert!(f.reconstruct().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_negative_and_bad_rank() {
        let mut x = random_nonneg(4, 3, 0);
        assert!(nmf(x.view(), 4, 10, 1e-4, 0).is_err());
        x[[1, 1]] = -0.1;
        assert!(matches!(nmf(x.view(), 2, 10, 1e-4, 0), Err(Error::NegativeEntry(_))));
    }

    #[test]
    fn seeded_runs_are_bit_identical() {
        let x = random_nonneg(12, 6, 5);
        let a = nmf(x.view(), 3, 100, 1e-6, 11).unwrap();
        let b = nmf(x.view(), 3, 100, 1e-6, 11).unwrap();
        assert_eq!(a.w, b.w);
        assert_eq!(a.h, b.h);
        assert_eq!(a.objective_trace, b.objective_trace);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn objective_never_increases(n in 2usize..15, m in 2usize..10, seed in any::<u64>()) {
            let x = random_nonneg(n, m, seed);
            let r = 1 + (seed as usize) % n.min(m);
            let f = nmf(x.view(), r, 100, 0.0, seed).unwrap();
            for pair in f.objective_trace.windows(2) {
                prop_assert!(pair[1] <= pair[0] + 1e-9);
            }
            prop_assert!(f.w.iter().chain(f.h.iter()).all(|&v| v >= 0.0));
        }
    }
}
