//! Keep the `c` entries of largest magnitude, zero the rest.
//!
//! Ties in magnitude prefer the smaller row-major index.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::capability::Capability;
use crate::matrix::Matrix;

/// Row-major indices ordered by decreasing magnitude, ties by increasing index.
fn ranking(u: &Matrix) -> Vec<usize> {
    let data = u.data();
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.sort_by(|&a, &b| data[b].abs().total_cmp(&data[a].abs()).then(a.cmp(&b)));
    idx
}

pub fn perceive(u: &Matrix, c: Capability) -> Matrix {
    let total = u.data().len();
    let keep = c.clamp_to(total);
    let mut out = Matrix::zeros(u.rows(), u.cols());
    for &k in ranking(u).iter().take(keep) {
        if u.data()[k] != 0.0 {
            out.data_mut()[k] = u.data()[k];
        }
    }
    out
}

pub fn nonzeros(u: &Matrix) -> usize {
    u.data().iter().filter(|v| **v != 0.0).count()
}

pub fn intrinsic_capability(u: &Matrix) -> Capability {
    Capability::Finite(nonzeros(u).max(1) as u32)
}

/// The masked entries of a perceived matrix and the threshold they must respect.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskShape {
    /// Smallest kept magnitude.
    pub theta: f64,
    /// Largest row-major index among kept entries of magnitude `theta`.
    pub last_tied: usize,
    /// Row-major indices of the zero entries that the mask hides.
    pub masked: Vec<usize>,
}

impl MaskShape {
    /// Shape of the preimage of `v` at level `g`, or `None` when the preimage is `{v}`.
    pub fn of(v: &Matrix, g: Capability) -> Option<MaskShape> {
        let k = nonzeros(v);
        let total = v.data().len();
        if k == 0 || k == total || g != Capability::Finite(k as u32) {
            return None;
        }
        let data = v.data();
        let theta = data.iter().filter(|x| **x != 0.0).map(|x| x.abs()).fold(f64::INFINITY, f64::min);
        let last_tied = (0..total).filter(|&i| data[i] != 0.0 && data[i].abs() == theta).max()?;
        let masked = (0..total).filter(|&i| data[i] == 0.0).collect();
        Some(MaskShape { theta, last_tied, masked })
    }

    /// Largest magnitude an entry at `index` may take and stay masked, and whether that
    /// magnitude itself is admissible.
    pub fn limit(&self, index: usize) -> (f64, bool) {
        (self.theta, index > self.last_tied)
    }

    /// Uniform value in the admissible interval of `index`, shrunk by `1 − 1e-9`.
    pub fn sample_value<R: Rng + ?Sized>(&self, index: usize, rng: &mut R) -> f64 {
        let (limit, closed) = self.limit(index);
        let radius = if closed { limit } else { limit * (1.0 - 1e-9) };
        radius * (2.0 * rng.gen::<f64>() - 1.0)
    }

    /// Fills the masked entries listed in `chosen` with nonzero admissible values.
    pub fn fill<R: Rng + ?Sized>(&self, v: &Matrix, chosen: &[usize], rng: &mut R) -> Matrix {
        let mut u = v.clone();
        for &i in chosen {
            let mut x = 0.0;
            while x == 0.0 {
                x = self.sample_value(i, rng);
            }
            u.data_mut()[i] = x;
        }
        u
    }

    /// A random subset of masked positions of size `count`.
    pub fn choose<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<usize> {
        let mut all = self.masked.clone();
        all.shuffle(rng);
        all.truncate(count);
        all
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[[f64; 2]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn keeps_largest_magnitudes() {
        let u = m(&[[3.0, -1.0], [2.0, 0.5]]);
        assert_eq!(perceive(&u, Capability::Finite(2)), m(&[[3.0, 0.0], [2.0, 0.0]]));
        let t = m(&[[1.0, 1.0], [0.0, 0.0]]);
        assert_eq!(perceive(&t, Capability::Finite(1)), m(&[[1.0, 0.0], [0.0, 0.0]]));
        assert_eq!(perceive(&u, Capability::Infinite), u);
    }

    #[test]
    fn capability_counts_nonzeros() {
        assert_eq!(intrinsic_capability(&m(&[[3.0, 0.0], [2.0, 0.0]])), Capability::Finite(2));
        assert_eq!(intrinsic_capability(&Matrix::zeros(2, 2)), Capability::Finite(1));
    }

    #[test]
    fn mask_shape_tie_rule() {
        let v = m(&[[3.0, 0.0], [2.0, 0.0]]);
        let s = MaskShape::of(&v, Capability::Finite(2)).unwrap();
        assert_eq!(s.theta, 2.0);
        assert_eq!(s.last_tied, 2);
        assert_eq!(s.masked, [1, 3]);
        assert_eq!(s.limit(1), (2.0, false));
        assert_eq!(s.limit(3), (2.0, true));
        assert!(MaskShape::of(&v, Capability::Finite(3)).is_none());
    }
}
