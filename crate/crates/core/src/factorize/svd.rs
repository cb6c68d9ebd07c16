//! Thin singular value decomposition by one-sided Jacobi rotations.

use ndarray::{s, Array1, Array2, ArrayView2};

use crate::error::{Error, Result};

/// Leading singular triplets of a matrix.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    /// n × r, orthonormal columns.
    pub u: Array2<f64>,
    /// r singular values, descending.
    pub s: Array1<f64>,
    /// m × r, orthonormal columns.
    pub v: Array2<f64>,
}

impl SvdFactors {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// `U · diag(S) · Vᵀ`.
    pub fn reconstruct(&self) -> Array2<f64> {
        let us = &self.u * &self.s.view().insert_axis(ndarray::Axis(0));
        us.dot(&self.v.t())
    }
}

const MAX_SWEEPS: usize = 80;

/// Full thin SVD: `p = min(n, m)` triplets, singular values descending.
pub fn thin_svd(x: ArrayView2<f64>) -> SvdFactors {
    let (n, m) = x.dim();
    if n < m {
        let t = thin_svd(x.t());
        return SvdFactors { u: t.v, s: t.s, v: t.u };
    }
    // n >= m: orthogonalize the m columns of a copy of x.
    let mut cols: Vec<Vec<f64>> = (0..m).map(|j| x.column(j).to_vec()).collect();
    let mut vcols: Vec<Vec<f64>> = (0..m)
        .map(|j| {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            e
        })
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..m {
            for j in (i + 1)..m {
                let (alpha, beta, gamma) = {
                    let (a, b) = (&cols[i], &cols[j]);
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = 0.0;
                    for k in 0..n {
                        alpha += a[k] * a[k];
                        beta += b[k] * b[k];
                        gamma += a[k] * b[k];
                    }
                    (alpha, beta, gamma)
                };
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = c * t;
                rotate(&mut cols, i, j, c, sn);
                rotate(&mut vcols, i, j, c, sn);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));

    let smax = norms.iter().copied().fold(0.0, f64::max);
    let negligible = smax * (n as f64) * f64::EPSILON;
    let mut u = Array2::<f64>::zeros((n, m));
    let mut v = Array2::<f64>::zeros((m, m));
    let mut sv = Array1::<f64>::zeros(m);
    let mut filled = 0;
    for (slot, &j) in order.iter().enumerate() {
        sv[slot] = norms[j];
        for k in 0..m {
            v[[k, slot]] = vcols[j][k];
        }
        if norms[j] > negligible {
            for k in 0..n {
                u[[k, slot]] = cols[j][k] / norms[j];
            }
            filled += 1;
        }
    }
    complete_basis(&mut u, filled);
    SvdFactors { u, s: sv, v }
}

fn rotate(cols: &mut [Vec<f64>], i: usize, j: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(j);
    let (a, b) = (&mut lo[i], &mut hi[0]);
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (xa, yb) = (*x, *y);
        *x = c * xa - s * yb;
        *y = s * xa + c * yb;
    }
}

/// Replace columns `from..` of `u` with unit vectors orthogonal to the rest.
fn complete_basis(u: &mut Array2<f64>, from: usize) {
    let (n, p) = u.dim();
    let mut next_axis = 0;
    for slot in from..p {
        loop {
            assert!(next_axis < n, "cannot complete an orthonormal basis");
            let mut cand = Array1::<f64>::zeros(n);
            cand[next_axis] = 1.0;
            next_axis += 1;
            // Two Gram-Schmidt passes for numerical orthogonality.
            for _ in 0..2 {
                for q in 0..slot {
                    let col = u.column(q);
                    let proj = col.dot(&cand);
                    cand.scaled_add(-proj, &col);
                }
            }
            let norm = cand.dot(&cand).sqrt();
            if norm > 1e-8 {
                u.column_mut(slot).assign(&(cand / norm));
                break;
            }
        }
    }
}

/// Top-`rank` singular triplets.
pub fn truncated_svd(x: ArrayView2<f64>, rank: usize) -> Result<SvdFactors> {
    let (n, m) = x.dim();
    if rank == 0 || rank > n.min(m) {
        return Err(Error::range("rank", rank, format!("1..={}", n.min(m))));
    }
    let full = thin_svd(x);
    Ok(SvdFactors {
        u: full.u.slice(s![.., ..rank]).to_owned(),
        s: full.s.slice(s![..rank]).to_owned(),
        v: full.v.slice(s![.., ..rank]).to_owned(),
    })
}

/// All `min(n, m)` singular values, descending.
pub fn singular_values(x: ArrayView2<f64>) -> Array1<f64> {
    thin_svd(x).s
}
