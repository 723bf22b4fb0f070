//! Best rank-`c` approximation through the canonical SVD.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::capability::Capability;
use crate::error::Result;
use crate::matrix::{norm, Matrix};
use crate::numerics::{canonical_svd, orthogonalize, DEFAULT_RANK_TOL, DEFAULT_TIE_TOL};

/// Frobenius tolerance for equality of limited-rank perceptions.
pub const MATCH_TOL: f64 = 1e-9;

/// Tolerances of the limited-rank family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowRank {
    /// Absolute singular-value gap below which a truncation cut is ambiguous.
    pub tie_tol: f64,
    /// Relative threshold below which a singular value counts as zero.
    pub rank_tol: f64,
}

impl Default for LowRank {
    fn default() -> Self {
        LowRank { tie_tol: DEFAULT_TIE_TOL, rank_tol: DEFAULT_RANK_TOL }
    }
}

impl LowRank {
    pub fn perceive(&self, u: &Matrix, c: Capability) -> Result<Matrix> {
        let p = u.rows().min(u.cols());
        let k = c.clamp_to(p);
        if k >= p {
            return Ok(u.clone());
        }
        canonical_svd(u, self.tie_tol).truncate(k, self.rank_tol)
    }

    pub fn rank(&self, u: &Matrix) -> usize {
        canonical_svd(u, self.tie_tol).rank(self.rank_tol)
    }

    pub fn intrinsic_capability(&self, u: &Matrix) -> Capability {
        Capability::Finite(self.rank(u).max(1) as u32)
    }

    /// The `c`-th largest singular value, or zero when `v` has rank below `c`.
    pub fn sigma_at(&self, v: &Matrix, c: Capability) -> f64 {
        let Capability::Finite(c) = c else { return 0.0 };
        let f = canonical_svd(v, self.tie_tol);
        let c = c as usize;
        if c == 0 || c > f.sigma.len() || f.rank(self.rank_tol) < c {
            return 0.0;
        }
        f.sigma[c - 1]
    }

    /// `v` plus up to `max_extra` random rank-one terms orthogonal to its row and column
    /// spaces, each with weight below the smallest nonzero singular value of `v`.
    pub fn extend<R: Rng + ?Sized>(&self, v: &Matrix, max_extra: usize, rng: &mut R) -> Matrix {
        let f = canonical_svd(v, self.tie_tol);
        let r = f.rank(self.rank_tol);
        let (m, n) = v.shape();
        let room = max_extra.min(m.min(n).saturating_sub(r));
        if r == 0 || room == 0 {
            return v.clone();
        }
        let extra = rng.gen_range(1..=room);
        let left_null: Vec<Vec<f64>> = (r..m).map(|j| f.u.column(j)).collect();
        let right_null: Vec<Vec<f64>> = (r..n).map(|j| f.v.column(j)).collect();
        let left = random_orthonormal(&left_null, m, extra, rng);
        let right = random_orthonormal(&right_null, n, extra, rng);
        let ceiling = f.sigma[r - 1] * (1.0 - 1e-9);
        let mut u = v.clone();
        for (a, b) in left.iter().zip(&right) {
            let mut s = 0.0;
            while s == 0.0 {
                s = ceiling * rng.gen::<f64>();
            }
            u.add_outer(s, a, b);
        }
        u
    }
}

/// `count` orthonormal vectors drawn at random from the span of the orthonormal `basis`.
fn random_orthonormal<R: Rng + ?Sized>(
    basis: &[Vec<f64>],
    dim: usize,
    count: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(count);
    while out.len() < count {
        let mut w = alloc::vec![0.0; dim];
        for b in basis {
            let g: f64 = rng.sample(StandardNormal);
            w.iter_mut().zip(b).for_each(|(x, y)| *x += g * y);
        }
        orthogonalize(&mut w, &out);
        let len = norm(&w);
        if len > 1e-8 {
            w.iter_mut().for_each(|x| *x /= len);
            out.push(w);
        }
    }
    out
}
