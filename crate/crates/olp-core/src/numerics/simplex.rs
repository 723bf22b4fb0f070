use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{invalid, Error, Result};

/// Tolerance used when accepting caller-supplied strategies.
pub const STRATEGY_TOL: f64 = 1e-9;

/// The probability simplex of a given dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Simplex {
    dim: usize,
}

impl Simplex {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("simplex dimension must be positive"));
        }
        Ok(Simplex { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Whether `x` has nonnegative entries summing to one within `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim
            && x.iter().all(|v| v.is_finite() && *v >= -tol)
            && (x.iter().sum::<f64>() - 1.0).abs() <= tol
    }

    /// Errors unless `x` is a member (within [`STRATEGY_TOL`]).
    pub fn check(&self, x: &[f64], what: &str) -> Result<()> {
        if x.len() != self.dim {
            return Err(invalid(alloc::format!(
                "{what} has length {}, expected {}",
                x.len(),
                self.dim
            )));
        }
        if !self.contains(x, STRATEGY_TOL) {
            return Err(invalid(alloc::format!("{what} is not a probability vector")));
        }
        Ok(())
    }

    pub fn barycenter(&self) -> Vec<f64> {
        vec![1.0 / self.dim as f64; self.dim]
    }

    pub fn vertex(&self, k: usize) -> Vec<f64> {
        crate::matrix::unit(self.dim, k)
    }

    /// Uniformly distributed point.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut x: Vec<f64> = (0..self.dim).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let s: f64 = x.iter().sum();
        x.iter_mut().for_each(|v| *v /= s);
        x
    }

    /// All points whose coordinates are multiples of `1/resolution`, in lexicographic order
    /// of the integer numerators (first coordinate descending).
    pub fn grid(&self, resolution: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        let mut counts = vec![0usize; self.dim];
        grid_rec(&mut counts, 0, resolution, resolution, &mut out);
        out
    }

    /// Number of points [`Simplex::grid`] would produce.
    pub fn grid_size(&self, resolution: usize) -> f64 {
        // C(resolution + dim - 1, dim - 1)
        let mut c = 1.0;
        for i in 1..self.dim {
            c = c * (resolution + i) as f64 / i as f64;
        }
        c
    }
}

fn grid_rec(counts: &mut [usize], pos: usize, left: usize, res: usize, out: &mut Vec<Vec<f64>>) {
    if pos + 1 == counts.len() {
        counts[pos] = left;
        out.push(counts.iter().map(|&c| c as f64 / res as f64).collect());
        return;
    }
    for c in (0..=left).rev() {
        counts[pos] = c;
        grid_rec(counts, pos + 1, left - c, res, out);
    }
}

/// Euclidean projection of `v` onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(invalid("cannot project an empty vector"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite entry in projection input".into()));
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cumsum += s;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if s - t > 0.0 {
            tau = t;
        }
    }
    let mut x: Vec<f64> = v.iter().map(|&a| (a - tau).max(0.0)).collect();
    let s: f64 = x.iter().sum();
    if s > 0.0 && (s - 1.0).abs() > 1e-15 {
        x.iter_mut().for_each(|a| *a /= s);
    }
    Ok(x)
}

/// Clips tiny negative entries and renormalizes a near-simplex vector.
pub(crate) fn renormalize(x: &mut [f64]) {
    x.iter_mut().for_each(|a| {
        if *a < 0.0 {
            *a = 0.0
        }
    });
    let s: f64 = x.iter().sum();
    if s > 0.0 {
        x.iter_mut().for_each(|a| *a /= s);
    }
}
