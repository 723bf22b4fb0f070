//! Bounds on the true expected payoff given a perceived matrix.
//!
//! For a perceived `v` at level `c`, the lower bound is the infimum of `xᵀ u y` over the
//! concretization of `v` and the upper bound the supremum. The masked and quantized families
//! have bilinear bounds `xᵀ L y` and `xᵀ H y`, tables take a minimum or maximum over finitely
//! many bilinear forms, and the limited-rank family adds a product-of-norms term.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::capability::Capability;
use crate::error::{invalid, Error, Result};
use crate::matrix::{dot, norm, Matrix};
use crate::numerics::{canonical_svd, Simplex};
use crate::perception::{
    check_perceived, enumerate_concretization, quantized, sample_concretization, LowRank,
    MaskShape, PerceptionFamily,
};

/// Activity tolerance for choosing the branch that realizes a minimum or maximum.
pub const ACTIVE_TOL: f64 = 1e-10;

/// Closed interval of true expected payoffs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PayoffBounds {
    pub lower: f64,
    pub upper: f64,
}

impl PayoffBounds {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64, slack: f64) -> bool {
        self.lower - slack <= value && value <= self.upper + slack
    }
}

/// `xᵀ u y`.
pub fn expected_payoff(u: &Matrix, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != u.rows() || y.len() != u.cols() {
        return Err(invalid(format!(
            "strategy lengths ({}, {}) do not match a {}x{} matrix",
            x.len(),
            y.len(),
            u.rows(),
            u.cols()
        )));
    }
    Ok(u.bilinear(x, y))
}

/// The bound functions of one perceived matrix, ready for repeated evaluation.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundModel {
    /// Lower bound is the minimum of `xᵀ M y` over `lower`, upper the maximum over `upper`.
    Envelope { lower: Vec<Matrix>, upper: Vec<Matrix> },
    /// `xᵀ v y ∓ sigma · ‖Lᵀx‖ · ‖Rᵀy‖` with `L`, `R` orthonormal null-space bases.
    LowRank { base: Matrix, sigma: f64, left_null: Vec<Vec<f64>>, right_null: Vec<Vec<f64>> },
}

impl BoundModel {
    pub fn new(family: &PerceptionFamily, v: &Matrix, c: Capability) -> Result<BoundModel> {
        let g = check_perceived(family, v, c)?;
        Ok(match family {
            PerceptionFamily::Masked => {
                let Some(shape) = MaskShape::of(v, g) else { return Ok(BoundModel::exact(v)) };
                let mut lower = v.clone();
                let mut upper = v.clone();
                for &i in &shape.masked {
                    lower.data_mut()[i] = -shape.theta;
                    upper.data_mut()[i] = shape.theta;
                }
                BoundModel::Envelope { lower: vec![lower], upper: vec![upper] }
            }
            PerceptionFamily::Quantized => {
                let (lower, upper) = quantized::endpoint_matrices(v, g);
                BoundModel::Envelope { lower: vec![lower], upper: vec![upper] }
            }
            PerceptionFamily::Table(t) => {
                let members: Vec<Matrix> =
                    enumerate_concretization(t, v, c)?.into_iter().map(|i| t.matrix(i).clone()).collect();
                BoundModel::Envelope { lower: members.clone(), upper: members }
            }
            PerceptionFamily::LimitedRank(lr) => low_rank_model(lr, v, g),
        })
    }

    /// Bounds that coincide with `xᵀ v y`.
    pub fn exact(v: &Matrix) -> BoundModel {
        BoundModel::Envelope { lower: vec![v.clone()], upper: vec![v.clone()] }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            BoundModel::Envelope { lower, .. } => lower[0].shape(),
            BoundModel::LowRank { base, .. } => base.shape(),
        }
    }

    /// Whether both bounds are minima or maxima of bilinear forms.
    pub fn is_piecewise_bilinear(&self) -> bool {
        matches!(self, BoundModel::Envelope { .. })
    }

    pub fn lower(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            BoundModel::Envelope { lower, .. } => {
                lower.iter().map(|m| m.bilinear(x, y)).fold(f64::INFINITY, f64::min)
            }
            BoundModel::LowRank { base, .. } => base.bilinear(x, y) - self.uncertainty(x, y),
        }
    }

    pub fn upper(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            BoundModel::Envelope { upper, .. } => {
                upper.iter().map(|m| m.bilinear(x, y)).fold(f64::NEG_INFINITY, f64::max)
            }
            BoundModel::LowRank { base, .. } => base.bilinear(x, y) + self.uncertainty(x, y),
        }
    }

    pub fn bounds(&self, x: &[f64], y: &[f64]) -> PayoffBounds {
        PayoffBounds { lower: self.lower(x, y), upper: self.upper(x, y) }
    }

    /// Half-width of the limited-rank interval; zero for envelopes.
    pub fn uncertainty(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            BoundModel::Envelope { .. } => 0.0,
            BoundModel::LowRank { sigma, left_null, right_null, .. } => {
                if *sigma == 0.0 {
                    return 0.0;
                }
                sigma * projection_norm(left_null, x) * projection_norm(right_null, y)
            }
        }
    }

    /// Supergradient in `x` of the lower bound at `(x, y)`.
    pub fn lower_grad_x(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        match self {
            BoundModel::Envelope { lower, .. } => active(lower, x, y, false).mul_vec(y),
            BoundModel::LowRank { base, sigma, left_null, right_null } => {
                let mut g = base.mul_vec(y);
                let ry = projection_norm(right_null, y);
                let dir = projection_direction(left_null, x);
                g.iter_mut().zip(&dir).for_each(|(a, d)| *a -= sigma * ry * d);
                g
            }
        }
    }

    /// Supergradient in `y` of the lower bound at `(x, y)`.
    pub fn lower_grad_y(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        match self {
            BoundModel::Envelope { lower, .. } => active(lower, x, y, false).tmul_vec(x),
            BoundModel::LowRank { base, sigma, left_null, right_null } => {
                let mut g = base.tmul_vec(x);
                let lx = projection_norm(left_null, x);
                let dir = projection_direction(right_null, y);
                g.iter_mut().zip(&dir).for_each(|(a, d)| *a -= sigma * lx * d);
                g
            }
        }
    }

    /// Subgradient in `y` of the upper bound at `(x, y)`.
    pub fn upper_grad_y(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        match self {
            BoundModel::Envelope { upper, .. } => active(upper, x, y, true).tmul_vec(x),
            BoundModel::LowRank { base, sigma, left_null, right_null } => {
                let mut g = base.tmul_vec(x);
                let lx = projection_norm(left_null, x);
                let dir = projection_direction(right_null, y);
                g.iter_mut().zip(&dir).for_each(|(a, d)| *a += sigma * lx * d);
                g
            }
        }
    }

    /// For a fixed `x`, the lower bound as a minimum of linear functions of `y`.
    pub fn lower_pieces_in_y(&self, x: &[f64]) -> Option<Vec<Vec<f64>>> {
        match self {
            BoundModel::Envelope { lower, .. } => Some(lower.iter().map(|m| m.tmul_vec(x)).collect()),
            BoundModel::LowRank { .. } => None,
        }
    }

    /// For a fixed `x`, the upper bound as a maximum of linear functions of `y`.
    pub fn upper_pieces_in_y(&self, x: &[f64]) -> Option<Vec<Vec<f64>>> {
        match self {
            BoundModel::Envelope { upper, .. } => Some(upper.iter().map(|m| m.tmul_vec(x)).collect()),
            BoundModel::LowRank { .. } => None,
        }
    }

    /// For a fixed `y`, the lower bound as a minimum of linear functions of `x`.
    pub fn lower_pieces_in_x(&self, y: &[f64]) -> Option<Vec<Vec<f64>>> {
        match self {
            BoundModel::Envelope { lower, .. } => Some(lower.iter().map(|m| m.mul_vec(y)).collect()),
            BoundModel::LowRank { .. } => None,
        }
    }
}

fn low_rank_model(lr: &LowRank, v: &Matrix, g: Capability) -> BoundModel {
    let f = canonical_svd(v, lr.tie_tol);
    let r = f.rank(lr.rank_tol);
    let (m, n) = v.shape();
    let sigma = if r >= 1 && Capability::Finite(r as u32) == g { f.sigma[r - 1] } else { 0.0 };
    BoundModel::LowRank {
        base: v.clone(),
        sigma,
        left_null: (r..m).map(|j| f.u.column(j)).collect(),
        right_null: (r..n).map(|j| f.v.column(j)).collect(),
    }
}

fn projection_norm(basis: &[Vec<f64>], x: &[f64]) -> f64 {
    libm::sqrt(basis.iter().map(|b| dot(b, x) * dot(b, x)).sum())
}

/// Gradient of `‖Bᵀx‖`, taken as zero where the norm vanishes.
fn projection_direction(basis: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let mut p = vec![0.0; x.len()];
    for b in basis {
        let c = dot(b, x);
        p.iter_mut().zip(b).for_each(|(a, v)| *a += c * v);
    }
    let len = norm(&p);
    if len <= 1e-15 {
        return vec![0.0; x.len()];
    }
    p.iter_mut().for_each(|a| *a /= len);
    p
}

/// Lowest-index matrix whose bilinear value is within [`ACTIVE_TOL`] of the extreme.
fn active<'a>(list: &'a [Matrix], x: &[f64], y: &[f64], maximize: bool) -> &'a Matrix {
    let values: Vec<f64> = list.iter().map(|m| m.bilinear(x, y)).collect();
    let target = if maximize {
        values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else {
        values.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let k = values.iter().position(|v| (v - target).abs() <= ACTIVE_TOL).unwrap_or(0);
    &list[k]
}

fn check_strategies(v: &Matrix, x: &[f64], y: &[f64]) -> Result<()> {
    Simplex::new(v.rows())?.check(x, "row strategy")?;
    Simplex::new(v.cols())?.check(y, "column strategy")
}

/// Lower and upper bounds on `xᵀ u y` over the concretization of `v` at level `c`.
pub fn payoff_bounds(
    family: &PerceptionFamily,
    v: &Matrix,
    c: Capability,
    x: &[f64],
    y: &[f64],
) -> Result<PayoffBounds> {
    check_strategies(v, x, y)?;
    Ok(BoundModel::new(family, v, c)?.bounds(x, y))
}

/// `σ_g(A) · ‖N_leftᵀ x‖ · ‖N_rightᵀ y‖` with `g = max(rank(A), c)`.
///
/// Zero when the rank of `A` is below `c`, since then `A` is its own concretization.
pub fn uncertainty_limited_rank(a: &Matrix, c: Capability, x: &[f64], y: &[f64]) -> Result<f64> {
    let lr = LowRank::default();
    check_strategies(a, x, y)?;
    let g = lr.intrinsic_capability(a).max(c);
    Ok(low_rank_model(&lr, a, g).uncertainty(x, y))
}

/// `A + q · x̂ ŷᵀ`, where `x̂` and `ŷ` are the normalized null-space components of `x` and `y`.
///
/// Truncating the result back to rank `r` recovers `A`, and its payoff at `(x, y)` moves by
/// exactly `q · ‖N_leftᵀ x‖ · ‖N_rightᵀ y‖`.
pub fn extremal_concretization_limited_rank(
    a: &Matrix,
    r: usize,
    x: &[f64],
    y: &[f64],
    q: f64,
) -> Result<Matrix> {
    let lr = LowRank::default();
    let f = canonical_svd(a, lr.tie_tol);
    let rank = f.rank(lr.rank_tol);
    let (m, n) = a.shape();
    if r == 0 || rank != r || r >= m.min(n) {
        return Err(invalid(format!("expected rank {r} in [1, {}), found rank {rank}", m.min(n))));
    }
    if x.len() != m || y.len() != n {
        return Err(invalid("strategy lengths do not match the matrix"));
    }
    let sigma = f.sigma[r - 1];
    if !(q.abs() < sigma) {
        return Err(Error::InvalidPerturbation { q, sigma });
    }
    let left: Vec<Vec<f64>> = (r..m).map(|j| f.u.column(j)).collect();
    let right: Vec<Vec<f64>> = (r..n).map(|j| f.v.column(j)).collect();
    let xh = projection_direction(&left, x);
    let yh = projection_direction(&right, y);
    if norm(&xh) == 0.0 || norm(&yh) == 0.0 {
        return Err(Error::DegenerateDirection);
    }
    let mut out = a.clone();
    out.add_outer(q, &xh, &yh);
    Ok(out)
}

/// Concretization members that approach the lower and upper bounds at `(x, y)`.
///
/// Returns `(toward_lower, toward_upper)`; empty when no targeted witness exists.
pub fn extremal_witnesses(
    family: &PerceptionFamily,
    v: &Matrix,
    c: Capability,
    x: &[f64],
    y: &[f64],
) -> Result<(Vec<Matrix>, Vec<Matrix>)> {
    let g = check_perceived(family, v, c)?;
    let shrink = 1.0 - 1e-9;
    Ok(match family {
        PerceptionFamily::Masked => {
            let Some(shape) = MaskShape::of(v, g) else { return Ok((vec![v.clone()], vec![v.clone()])) };
            let fill = |sign: f64| {
                let mut u = v.clone();
                for &i in &shape.masked {
                    let (limit, closed) = shape.limit(i);
                    u.data_mut()[i] = sign * if closed { limit } else { limit * shrink };
                }
                u
            };
            (vec![fill(-1.0)], vec![fill(1.0)])
        }
        PerceptionFamily::Quantized => {
            let delta = quantized::cell_width(g) * shrink;
            let lo = v.map(|e| if e <= 0.0 { e - delta } else { e });
            let hi = v.map(|e| if e >= 0.0 { e + delta } else { e });
            (vec![lo], vec![hi])
        }
        PerceptionFamily::LimitedRank(lr) => {
            let f = canonical_svd(v, lr.tie_tol);
            let r = f.rank(lr.rank_tol);
            if r == 0 || Capability::Finite(r as u32) != g || r >= v.rows().min(v.cols()) {
                return Ok((vec![v.clone()], vec![v.clone()]));
            }
            let q = f.sigma[r - 1] * shrink;
            match (
                extremal_concretization_limited_rank(v, r, x, y, -q),
                extremal_concretization_limited_rank(v, r, x, y, q),
            ) {
                (Ok(lo), Ok(hi)) => (vec![lo], vec![hi]),
                (Err(Error::DegenerateDirection), _) | (_, Err(Error::DegenerateDirection)) => {
                    (vec![v.clone()], vec![v.clone()])
                }
                (Err(e), _) | (_, Err(e)) => return Err(e),
            }
        }
        PerceptionFamily::Table(t) => {
            let all: Vec<Matrix> =
                enumerate_concretization(t, v, c)?.into_iter().map(|i| t.matrix(i).clone()).collect();
            (all.clone(), all)
        }
    })
}

/// Empirical bounds: extremes of `xᵀ u y` over `n` seeded samples and the targeted witnesses.
pub fn bounds_sampling_oracle(
    family: &PerceptionFamily,
    v: &Matrix,
    c: Capability,
    x: &[f64],
    y: &[f64],
    n: usize,
    seed: u64,
) -> Result<PayoffBounds> {
    check_strategies(v, x, y)?;
    let (lo, hi) = extremal_witnesses(family, v, c, x, y)?;
    let samples = sample_concretization(family, v, c, n, seed)?;
    let mut lower = v.bilinear(x, y);
    let mut upper = lower;
    for u in samples.iter().chain(&lo).chain(&hi) {
        let p = u.bilinear(x, y);
        lower = lower.min(p);
        upper = upper.max(p);
    }
    Ok(PayoffBounds { lower, upper })
}
