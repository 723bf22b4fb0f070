//! Numerical kernels: simplex projection, canonical SVD, null spaces, concave maximization
//! over the simplex and zero-sum game values.

mod linalg;
mod lp;
mod piecewise;
mod simplex;
mod subgradient;
mod svd;
mod zero_sum;

pub use linalg::{binomial, complete_basis, orthogonalize, solve_linear, Combinations};
pub use lp::{maximize_min_affine_lp, LinearProgram, LpOutcome};
pub use piecewise::{maximize_min_affine, PiecewiseMax, MAX_SUBSYSTEMS};
pub(crate) use simplex::renormalize;
pub use simplex::{project_simplex, Simplex, STRATEGY_TOL};
pub use subgradient::{subgradient_maximize, SubgradientReport};
pub use svd::{canonical_svd, null_space_bases, SvdFactors, DEFAULT_RANK_TOL, DEFAULT_TIE_TOL};
pub use zero_sum::{round_budget, zero_sum_value, ZeroSumSolution};
