use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::simplex::{project_simplex, Simplex};
use crate::error::{invalid, Error, Result};
use crate::matrix::norm;

/// Outcome of [`subgradient_maximize`].
#[derive(Clone, Debug, PartialEq)]
pub struct SubgradientReport {
    pub argmax: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Improvement of the best value during the final restart window.
    pub certified_gap: f64,
}

/// Maximizes a concave function over the probability simplex of dimension `dim`.
///
/// Projected subgradient ascent with normalized steps `r / √t`, restarted from the best
/// iterate in windows; the radius `r` starts at the simplex diameter and halves whenever a
/// window stays local. Stops once the radius drops below `tol²` or after `max_iters`
/// evaluations.
pub fn subgradient_maximize<F>(
    mut objective: F,
    dim: usize,
    tol: f64,
    max_iters: usize,
    seed: u64,
) -> Result<SubgradientReport>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let simplex = Simplex::new(dim)?;
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let mut eval = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
        let (v, g) = objective(x);
        if !v.is_finite() {
            return Err(Error::ObjectiveError(alloc::format!("value {v} at {x:?}")));
        }
        if g.len() != dim || g.iter().any(|c| !c.is_finite()) {
            return Err(Error::ObjectiveError("bad subgradient".into()));
        }
        Ok((v, g))
    };

    if dim == 1 {
        let x = alloc::vec![1.0];
        let (value, _) = eval(&x)?;
        return Ok(SubgradientReport { argmax: x, value, iterations: 1, certified_gap: 0.0 });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = simplex.barycenter();
    let start: Vec<f64> = simplex
        .sample(&mut rng)
        .iter()
        .zip(&center)
        .map(|(a, b)| 0.5 * (a + b))
        .collect();

    let (mut best_val, _) = eval(&start)?;
    let mut best_x = start;
    let mut iterations = 1;
    let window = 60 * dim;
    let mut radius = core::f64::consts::SQRT_2;
    let floor = (tol * tol).max(1e-14);
    let mut certified_gap = f64::INFINITY;

    'outer: while iterations < max_iters && radius > floor {
        let window_start_val = best_val;
        let window_start_x = best_x.clone();
        let mut x = best_x.clone();
        let (_, g0) = eval(&x)?;
        iterations += 1;
        let mut grad = g0;
        for t in 1..=window {
            let gn = norm(&grad);
            if gn == 0.0 {
                // zero subgradient: x is a maximizer of the concave objective
                certified_gap = 0.0;
                break 'outer;
            }
            let step = radius / libm::sqrt(t as f64) / gn;
            let moved: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a + step * g).collect();
            x = project_simplex(&moved)?;
            let (v, g) = eval(&x)?;
            iterations += 1;
            if v > best_val {
                best_val = v;
                best_x.clone_from(&x);
            }
            grad = g;
            if iterations >= max_iters {
                break;
            }
        }
        certified_gap = best_val - window_start_val;
        let drift = norm(&best_x.iter().zip(&window_start_x).map(|(a, b)| a - b).collect::<Vec<_>>());
        if drift < 0.5 * radius {
            radius *= 0.5;
        }
    }
    Ok(SubgradientReport { argmax: best_x, value: best_val, iterations, certified_gap })
}
