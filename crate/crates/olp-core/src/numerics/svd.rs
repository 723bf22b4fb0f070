use alloc::vec::Vec;

use super::linalg::complete_basis;
use crate::error::{Error, Result};
use crate::matrix::{norm, Matrix};

/// Default relative threshold below which a singular value counts as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;
/// Default absolute gap below which two singular values count as tied.
pub const DEFAULT_TIE_TOL: f64 = 1e-12;

const SIGN_TOL: f64 = 1e-12;

/// Full singular value decomposition `A = U · diag(sigma) · Vᵀ` with canonical signs.
#[derive(Clone, Debug, PartialEq)]
pub struct SvdFactors {
    /// `m × m` orthogonal.
    pub u: Matrix,
    /// Non-increasing, length `min(m, n)`.
    pub sigma: Vec<f64>,
    /// `n × n` orthogonal.
    pub v: Matrix,
    pub tie_tol: f64,
}

impl SvdFactors {
    /// Number of singular values above `rank_tol · sigma_max`.
    pub fn rank(&self, rank_tol: f64) -> usize {
        let smax = self.sigma.first().copied().unwrap_or(0.0);
        if smax <= 0.0 {
            return 0;
        }
        self.sigma.iter().filter(|&&s| s > rank_tol * smax).count()
    }

    /// Sum of the leading `k` singular triplets.
    ///
    /// Fails with [`Error::DegenerateTie`] when the cut separates two nonzero singular values
    /// closer than `tie_tol`.
    pub fn truncate(&self, k: usize, rank_tol: f64) -> Result<Matrix> {
        let p = self.sigma.len();
        let k = k.min(p);
        if k < p && k > 0 {
            let smax = self.sigma[0];
            let next = self.sigma[k];
            let gap = self.sigma[k - 1] - next;
            if next > rank_tol * smax && gap < self.tie_tol {
                return Err(Error::DegenerateTie { index: k, gap });
            }
        }
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut out = Matrix::zeros(m, n);
        for t in 0..k {
            let s = self.sigma[t];
            if s == 0.0 {
                continue;
            }
            out.add_outer(s, &self.u.column(t), &self.v.column(t));
        }
        Ok(out)
    }
}

/// Deterministic SVD by one-sided Jacobi rotations.
///
/// Each left singular vector of a triplet is signed so that its first nonzero component is
/// negative; the matching right vector follows. Completion vectors obey the same sign rule.
pub fn canonical_svd(a: &Matrix, tie_tol: f64) -> SvdFactors {
    let (m, n) = a.shape();
    let (u, sigma, v) = if m >= n {
        jacobi_tall(a)
    } else {
        let (u_t, s, v_t) = jacobi_tall(&a.transpose());
        (v_t, s, u_t)
    };
    let mut f = SvdFactors { u, sigma, v, tie_tol };
    canonicalize_signs(&mut f);
    f
}

/// Orthonormal bases of the right and left null spaces, as matrix columns.
pub fn null_space_bases(a: &Matrix, rank_tol: f64) -> (Matrix, Matrix) {
    let f = canonical_svd(a, DEFAULT_TIE_TOL);
    let r = f.rank(rank_tol);
    let right = f.v.column_range(r, f.v.cols());
    let left = f.u.column_range(r, f.u.cols());
    (right, left)
}

/// SVD of a matrix with at least as many rows as columns.
fn jacobi_tall(a: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let (m, n) = a.shape();
    // column-major working copies
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n).map(|j| crate::matrix::unit(n, j)).collect();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = w[p].iter().map(|x| x * x).sum();
                let beta: f64 = w[q].iter().map(|x| x * x).sum();
                let gamma: f64 = w[p].iter().zip(&w[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || gamma.abs() <= 1e-15 * libm::sqrt(alpha * beta) {
                    continue;
                }
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = w.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let smax = norms[order[0]];
    let cutoff = smax * 1e-13 * m.max(n) as f64;

    let mut sigma = Vec::with_capacity(n);
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut v_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    for &j in &order {
        sigma.push(norms[j]);
        v_cols.push(v[j].clone());
    }
    for (t, &j) in order.iter().enumerate() {
        if sigma[t] > cutoff && sigma[t] > 0.0 {
            u_cols.push(w[j].iter().map(|x| x / sigma[t]).collect());
        } else {
            break;
        }
    }
    complete_basis(&mut u_cols, m);
    (from_columns(m, &u_cols), sigma, from_columns(n, &v_cols))
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

fn from_columns(rows: usize, cols: &[Vec<f64>]) -> Matrix {
    let mut out = Matrix::zeros(rows, cols.len());
    for (j, col) in cols.iter().enumerate() {
        for (i, &x) in col.iter().enumerate() {
            out[(i, j)] = x;
        }
    }
    out
}

fn leading_sign_positive(m: &Matrix, j: usize) -> bool {
    (0..m.rows()).map(|i| m[(i, j)]).find(|x| x.abs() > SIGN_TOL).is_some_and(|x| x > 0.0)
}

fn flip_column(m: &mut Matrix, j: usize) {
    for i in 0..m.rows() {
        m[(i, j)] = -m[(i, j)];
    }
}

fn canonicalize_signs(f: &mut SvdFactors) {
    let p = f.sigma.len();
    for j in 0..p {
        if leading_sign_positive(&f.u, j) {
            flip_column(&mut f.u, j);
            flip_column(&mut f.v, j);
        }
    }
    for j in p..f.u.cols() {
        if leading_sign_positive(&f.u, j) {
            flip_column(&mut f.u, j);
        }
    }
    for j in p..f.v.cols() {
        if leading_sign_positive(&f.v, j) {
            flip_column(&mut f.v, j);
        }
    }
}
