//! A response function stored as a handful of anchor responses plus an oracle.
//!
//! The row player's objective is the minimum of `xᵀ s` over the payoff vectors
//! `s = M · R(w)`, one per held matrix `w` and bound piece `M`. A minimax point `s*` of their
//! convex hull certifies optimality of `x*`, and a basic solution of the linear program that
//! finds it uses at most `m + 1` vectors. Their held matrices keep their stored responses;
//! every other matrix is answered by an oracle that keeps the row player at `f(x*)` while
//! staying near-optimal for the column player.

use alloc::vec;
use alloc::vec::Vec;

use super::{objective, row_bound, ResponseFunction};
use crate::bounds::BoundModel;
use crate::error::{invalid, Error, Result};
use crate::matrix::Matrix;
use crate::numerics::{maximize_min_affine_lp, LinearProgram, LpOutcome, Simplex};
use crate::perception::{NarrowSet, PerceptionFamily};
use crate::solver::GameInstance;

/// Oracle slack below which the oracle is considered to have failed.
const ORACLE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct CompactResponseRepr {
    pub x_star: Vec<f64>,
    /// `f(x*)` under the original response function.
    pub f_star: f64,
    pub anchors: Vec<(Matrix, Vec<f64>)>,
    pub eps: f64,
    /// Extra column-player slack granted to the oracle.
    pub eps_prime: f64,
}

/// Compresses an enumerated equilibrium response function.
pub fn build_compact_repr(
    game: &GameInstance,
    x_star: &[f64],
    ry: &ResponseFunction,
    eps: f64,
) -> Result<CompactResponseRepr> {
    let (m, _) = game.shape();
    Simplex::new(m)?.check(x_star, "row strategy")?;
    if matches!(game.family, PerceptionFamily::LimitedRank(_)) {
        return Err(Error::Unsupported("compact representations need piecewise-bilinear bounds".into()));
    }
    let NarrowSet::Enumerated(elements) = game.narrow_set()? else {
        return Err(Error::Unsupported("compact representations need an enumerable narrow set".into()));
    };
    let mut terms = Vec::with_capacity(elements.len());
    // (owner, payoff vector), exact duplicates dropped in favor of the first owner
    let mut vectors: Vec<(usize, Vec<f64>)> = Vec::new();
    for (k, w) in elements.iter().enumerate() {
        let y = ry.respond(game, w)?;
        let bound = row_bound(game, w)?;
        let pieces = bound.lower_pieces_in_x(&y).expect("envelope bounds");
        for s in pieces {
            if !vectors.iter().any(|(_, o)| *o == s) {
                vectors.push((k, s));
            }
        }
        terms.push((bound, y));
    }
    let f_star = objective(&terms, x_star);

    // minimize t subject to Σ λ_v s_v ≤ t, Σ λ_v = 1, λ ≥ 0; t = t⁺ − t⁻
    let nv = vectors.len();
    let mut c = vec![0.0; nv + 2];
    c[nv] = 1.0;
    c[nv + 1] = -1.0;
    let mut lp = LinearProgram::new(c);
    for i in 0..m {
        let mut row: Vec<f64> = vectors.iter().map(|(_, s)| s[i]).collect();
        row.extend([-1.0, 1.0]);
        lp.less_eq(row, 0.0);
    }
    let mut ones = vec![1.0; nv];
    ones.extend([0.0, 0.0]);
    lp.equals(ones, 1.0);
    let LpOutcome::Optimal { z, .. } = lp.solve()? else {
        return Err(Error::ObjectiveError("minimax payoff vector not found".into()));
    };
    let mut owners: Vec<usize> = vectors.iter().zip(&z).filter(|(_, &l)| l > 1e-12).map(|((k, _), _)| *k).collect();
    owners.sort_unstable();
    owners.dedup();
    let anchors = owners.into_iter().map(|k| (elements[k].clone(), terms[k].1.clone())).collect();
    let eps_prime = if matches!(game.family, PerceptionFamily::Table(_)) { 0.0 } else { 1e-6 };
    Ok(CompactResponseRepr { x_star: x_star.to_vec(), f_star, anchors, eps, eps_prime })
}

/// The response the compact representation assigns to `u`.
///
/// Anchors answer with their stored response. Other members of the narrow set get a
/// strategy maximizing the smaller of two slacks: the row player's bound against `f*`, and
/// the column player's shortfall against their optimum plus `eps + eps'`.
pub fn eval_compact_repr(game: &GameInstance, repr: &CompactResponseRepr, u: &Matrix) -> Result<Vec<f64>> {
    if let Some((_, y)) = repr.anchors.iter().find(|(w, _)| game.family.same(w, u)) {
        return Ok(y.clone());
    }
    let narrow = game.narrow_set()?;
    let member = match &narrow {
        NarrowSet::Enumerated(list) => list.iter().any(|w| game.family.same(w, u)),
        NarrowSet::Parametric(p) => p.contains(u)?,
    };
    if !member {
        return Err(invalid("matrix is not in the narrow set"));
    }
    let x = &repr.x_star;
    let held = BoundModel::new(&game.family, u, game.c2)?;
    let row = row_bound(game, u)?;
    let best = game.respond(u, x, 1e-12)?;
    let allowance = repr.eps + repr.eps_prime;
    let (Some(row_pieces), Some(held_pieces)) = (
        row.lower_pieces_in_y(x),
        if game.zero_sum() { held.upper_pieces_in_y(x) } else { held.lower_pieces_in_y(x) },
    ) else {
        return Err(Error::Unsupported("compact representations need piecewise-bilinear bounds".into()));
    };
    let mut slopes = Vec::new();
    let mut offsets = Vec::new();
    for p in row_pieces {
        slopes.push(p);
        offsets.push(-repr.f_star);
    }
    if game.zero_sum() {
        // (min P⁺ + allowance) − xᵀ M y for every upper piece M
        let target = held.upper(x, &best) + allowance;
        for p in held_pieces {
            slopes.push(p.into_iter().map(|a| -a).collect());
            offsets.push(target);
        }
    } else {
        // xᵀ M y − (max P⁻ − allowance) for every lower piece M
        let target = held.lower(x, &best) - allowance;
        for p in held_pieces {
            slopes.push(p);
            offsets.push(-target);
        }
    }
    let (slack, y) = maximize_min_affine_lp(&slopes, &offsets)?;
    if slack < -ORACLE_TOL {
        return Err(Error::OracleFailure { slack });
    }
    Ok(y)
}
