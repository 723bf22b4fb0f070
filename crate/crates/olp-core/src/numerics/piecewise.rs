use alloc::vec;
use alloc::vec::Vec;

use super::linalg::{binomial, solve_linear, Combinations};
use crate::error::{invalid, Error, Result};
use crate::matrix::dot;

/// Largest number of square subsystems [`maximize_min_affine`] will try.
pub const MAX_SUBSYSTEMS: usize = 4_000_000;

/// Exact maximum of a concave piecewise-linear function on the simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseMax {
    pub value: f64,
    pub argmax: Vec<f64>,
    /// Every basic maximizer found (vertices of the optimal face), deduplicated.
    pub vertices: Vec<Vec<f64>>,
}

/// Maximizes `x ↦ min_k (slopes[k]·x + offsets[k])` over the probability simplex.
///
/// Enumerates the basic solutions of the equivalent linear program: a support `S` of the
/// point and an equally sized set of active pieces, solved as a square system. Every vertex
/// of the optimal face is among them, so the result is exact up to rounding.
pub fn maximize_min_affine(slopes: &[Vec<f64>], offsets: &[f64], tol: f64) -> Result<PiecewiseMax> {
    let Some(first) = slopes.first() else {
        return Err(invalid("no affine pieces"));
    };
    let d = first.len();
    if d == 0 || slopes.iter().any(|s| s.len() != d) || offsets.len() != slopes.len() {
        return Err(invalid("inconsistent affine piece dimensions"));
    }
    // Offsets fold into the slopes because coordinates sum to one.
    let mut pieces: Vec<Vec<f64>> = slopes
        .iter()
        .zip(offsets)
        .map(|(s, &b)| s.iter().map(|a| a + b).collect())
        .collect();
    if pieces.iter().flatten().any(|v| !v.is_finite()) {
        return Err(invalid("non-finite affine piece"));
    }
    prune_dominated(&mut pieces);
    let k = pieces.len();

    let total: f64 = (1..=d.min(k)).map(|s| binomial(d, s) * binomial(k, s)).sum();
    if total > MAX_SUBSYSTEMS as f64 {
        return Err(Error::TooLarge { size: total, cap: MAX_SUBSYSTEMS });
    }

    let eval = |x: &[f64]| pieces.iter().map(|p| dot(p, x)).fold(f64::INFINITY, f64::min);
    let mut candidates: Vec<(f64, Vec<f64>)> = Vec::new();
    for s in 1..=d.min(k) {
        for support in Combinations::new(d, s) {
            for active in Combinations::new(k, s) {
                // unknowns: x_S (s of them) and the common value v
                let n = s + 1;
                let mut a = vec![0.0; n * n];
                let mut b = vec![0.0; n];
                for (r, &piece) in active.iter().enumerate() {
                    for (c, &i) in support.iter().enumerate() {
                        a[r * n + c] = pieces[piece][i];
                    }
                    a[r * n + s] = -1.0;
                }
                for c in 0..s {
                    a[s * n + c] = 1.0;
                }
                b[s] = 1.0;
                let Some(sol) = solve_linear(a, b, n) else { continue };
                if sol[..s].iter().any(|&v| v < -1e-10) {
                    continue;
                }
                let mut x = vec![0.0; d];
                for (c, &i) in support.iter().enumerate() {
                    x[i] = sol[c].max(0.0);
                }
                let sum: f64 = x.iter().sum();
                if sum <= 0.0 {
                    continue;
                }
                x.iter_mut().for_each(|v| *v /= sum);
                candidates.push((eval(&x), x));
            }
        }
    }
    let best = candidates.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let mut argmax = None;
    for (val, x) in candidates {
        if val >= best - tol {
            if argmax.is_none() && val == best {
                argmax = Some(x.clone());
            }
            if !vertices.iter().any(|v| linf(v, &x) <= 1e-9) {
                vertices.push(x);
            }
        }
    }
    Ok(PiecewiseMax { value: best, argmax: argmax.expect("at least one vertex is basic"), vertices })
}

/// Drops pieces that are pointwise no smaller than another piece, and exact duplicates.
fn prune_dominated(pieces: &mut Vec<Vec<f64>>) {
    let mut keep = vec![true; pieces.len()];
    for i in 0..pieces.len() {
        for j in 0..pieces.len() {
            if i == j || !keep[j] {
                continue;
            }
            let dominated = pieces[i].iter().zip(&pieces[j]).all(|(a, b)| a >= b);
            let equal = pieces[i] == pieces[j];
            if dominated && (!equal || j < i) {
                keep[i] = false;
                break;
            }
        }
    }
    let mut it = keep.iter();
    pieces.retain(|_| *it.next().unwrap());
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
