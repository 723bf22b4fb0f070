use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::matrix::Matrix;

/// Approximate solution of a zero-sum matrix game (row player maximizes).
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroSumSolution {
    pub value: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Guaranteed payoff of `x`: a lower bound on the game value.
    pub lower: f64,
    /// Worst-case loss of `y`: an upper bound on the game value.
    pub upper: f64,
    pub rounds: u64,
}

/// Round budget `ceil(16 · ln(max(m, n)) · (range / tol)²)`.
pub fn round_budget(a: &Matrix, tol: f64) -> u64 {
    let range = payoff_range(a);
    let k = a.rows().max(a.cols()) as f64;
    let t = 16.0 * libm::log(k) * (range / tol) * (range / tol);
    (libm::ceil(t).min(u64::MAX as f64) as u64).max(1)
}

fn payoff_range(a: &Matrix) -> f64 {
    let lo = a.data().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = a.data().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// Value of the zero-sum game `A` within `tol`, by multiplicative-weights self-play.
///
/// Both players run optimistic Hedge on the payoffs rescaled to `[0, 1]`. Every 64 rounds the
/// average and the current strategies are scored by their duality gap; the best-scoring pair
/// is kept and the loop stops once its gap is at most `2·tol`. The reported value is the
/// midpoint of that certified bracket.
pub fn zero_sum_value(a: &Matrix, tol: f64) -> Result<ZeroSumSolution> {
    if !a.is_finite() {
        return Err(invalid("non-finite payoff matrix"));
    }
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let (m, n) = a.shape();
    let lo = a.data().iter().copied().fold(f64::INFINITY, f64::min);
    let range = payoff_range(a);
    if range == 0.0 {
        return Ok(ZeroSumSolution {
            value: lo,
            x: vec![1.0 / m as f64; m],
            y: vec![1.0 / n as f64; n],
            lower: lo,
            upper: lo,
            rounds: 0,
        });
    }
    let b = a.map(|v| (v - lo) / range);
    let budget = round_budget(a, tol);
    let eta = 0.5;
    let target = 2.0 * tol / range;

    let mut cum_x = vec![0.0; m];
    let mut cum_y = vec![0.0; n];
    let mut last_x = vec![0.0; m];
    let mut last_y = vec![0.0; n];
    let mut avg_x = vec![0.0; m];
    let mut avg_y = vec![0.0; n];
    let mut rounds = 0u64;
    let mut best = (0.0, 1.0, vec![1.0 / m as f64; m], vec![1.0 / n as f64; n]);
    while rounds < budget {
        let x = softmax(&cum_x, &last_x, eta);
        let y = softmax(&cum_y, &last_y, eta);
        last_x = b.mul_vec(&y);
        last_y = b.tmul_vec(&x).iter().map(|v| -v).collect();
        cum_x.iter_mut().zip(&last_x).for_each(|(c, g)| *c += g);
        cum_y.iter_mut().zip(&last_y).for_each(|(c, g)| *c += g);
        avg_x.iter_mut().zip(&x).for_each(|(s, v)| *s += v);
        avg_y.iter_mut().zip(&y).for_each(|(s, v)| *s += v);
        rounds += 1;
        if rounds % 64 == 0 || rounds == budget {
            let t = rounds as f64;
            let ax: Vec<f64> = avg_x.iter().map(|v| v / t).collect();
            let ay: Vec<f64> = avg_y.iter().map(|v| v / t).collect();
            for (px, py) in [(ax, ay), (x, y)] {
                let (l, u) = bracket(&b, &px, &py);
                if u - l < best.1 - best.0 {
                    best = (l, u, px, py);
                }
            }
            if best.1 - best.0 <= target {
                break;
            }
        }
    }
    let (lower, upper, x, y) = best;
    let (lower, upper) = (lo + range * lower, lo + range * upper);
    Ok(ZeroSumSolution { value: 0.5 * (lower + upper), x, y, lower, upper, rounds })
}

fn bracket(b: &Matrix, x: &[f64], y: &[f64]) -> (f64, f64) {
    let lower = b.tmul_vec(x).into_iter().fold(f64::INFINITY, f64::min);
    let upper = b.mul_vec(y).into_iter().fold(f64::NEG_INFINITY, f64::max);
    (lower, upper)
}

/// Optimistic Hedge weights: `exp(η (cumulative + last))`, normalized.
fn softmax(cum: &[f64], last: &[f64], eta: f64) -> Vec<f64> {
    let z: Vec<f64> = cum.iter().zip(last).map(|(c, l)| eta * (c + l)).collect();
    let zmax = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = z.iter().map(|v| libm::exp(v - zmax)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_games() {
        let mp = Matrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]).unwrap();
        assert!(zero_sum_value(&mp, 1e-4).unwrap().value.abs() <= 1e-4);
        let one = Matrix::from_rows(&[[5.0]]).unwrap();
        assert_eq!(zero_sum_value(&one, 1e-4).unwrap().value, 5.0);
        let rps = Matrix::from_rows(&[[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]]).unwrap();
        let s = zero_sum_value(&rps, 1e-4).unwrap();
        assert!(s.value.abs() <= 1e-4);
        assert!(s.lower <= 1e-12 && s.upper >= -1e-12);
    }

    #[test]
    fn saddle_point_game() {
        let a = Matrix::from_rows(&[[3.0, 1.0], [4.0, 2.0]]).unwrap();
        let s = zero_sum_value(&a, 1e-5).unwrap();
        assert!((s.value - 2.0).abs() <= 1e-5);
    }

    #[test]
    fn budget_formula() {
        let mp = Matrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]).unwrap();
        let expected = libm::ceil(16.0 * libm::log(2.0) * 400.0) as u64;
        assert_eq!(round_budget(&mp, 0.1), expected);
    }
}
