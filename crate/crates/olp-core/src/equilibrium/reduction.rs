//! Reduction of a general-sum table game to a zero-sum table game with twice the rows.
//!
//! Payoffs are moved by affine maps into disjoint bands: the row player's own concretization
//! into `[0.2, 0.8]`, the column player's matrices (reversed) into `[1.2, 1.8]`. Every held
//! matrix `V` becomes `W_V = [1; k_n V + b_n]`; its concretization members become
//! `[k_n V' + b_n; 0]`, and each pairing with a row matrix `U` becomes
//! `[k_p U + b_p; −(k_n V + b_n)]`. At level 1 everything collapses to the all-ones matrix,
//! which is what the reduced row player sees.

use alloc::format;
use alloc::vec::Vec;

use super::ResponseFunction;
use crate::capability::Capability;
use crate::error::{invalid, Error, Result};
use crate::matrix::Matrix;
use crate::numerics::{renormalize, Simplex};
use crate::perception::{enumerate_concretization, NarrowSet, PerceptionFamily, TableElement, TableFamily};
use crate::solver::GameInstance;

/// Largest tail mass [`map_back_equilibrium`] tolerates on the padding rows.
pub const TAIL_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionMapping {
    /// Row count of the original game.
    pub rows: usize,
    pub k_p: f64,
    pub b_p: f64,
    pub k_n: f64,
    pub b_n: f64,
    /// Each member of the original narrow set with the reduced matrix that stands for it.
    pub lifted: Vec<(Matrix, Matrix)>,
}

/// Builds the zero-sum table game whose equilibria map back to equilibria of `game`.
pub fn reduce_general_to_zero_sum(game: &GameInstance) -> Result<(GameInstance, ReductionMapping)> {
    let Some(v1) = &game.perceived_col else {
        return Err(invalid("the reduction takes a general-sum game"));
    };
    let PerceptionFamily::Table(t) = &game.family else {
        return Err(Error::Unsupported("the reduction is defined for table families".into()));
    };
    let members = |v: &Matrix, c: Capability| -> Result<Vec<Matrix>> {
        Ok(enumerate_concretization(t, v, c)?.into_iter().map(|i| t.matrix(i).clone()).collect())
    };
    let row_side = members(&game.perceived_row, game.c1)?;
    let NarrowSet::Enumerated(held) = game.narrow_set()? else {
        return Err(Error::Unsupported("table narrow sets are enumerated".into()));
    };
    let below: Vec<Vec<Matrix>> = held.iter().map(|v| members(v, game.c2)).collect::<Result<_>>()?;
    let mut col_side = members(v1, game.c1)?;
    col_side.extend(held.iter().cloned());
    col_side.extend(below.iter().flatten().cloned());

    let (lo_u, hi_u) = range(&row_side);
    let (lo_v, hi_v) = range(&col_side);
    let (k_p, b_p) = if hi_u > lo_u {
        let k = 0.6 / (hi_u - lo_u);
        (k, 0.2 - k * lo_u)
    } else {
        (1.0, 0.5 - lo_u)
    };
    let (k_n, b_n) = if hi_v > lo_v {
        let k = -0.6 / (hi_v - lo_v);
        (k, 1.2 - k * hi_v)
    } else {
        (-1.0, 1.5 + lo_v)
    };
    let lift_p = |u: &Matrix| u.map(|a| k_p * a + b_p);
    let lift_n = |v: &Matrix| v.map(|a| k_n * a + b_n);

    let (m, n) = game.shape();
    let ones = Matrix::filled(2 * m, n, 1.0);
    let top_ones = Matrix::filled(m, n, 1.0);
    let zeros = Matrix::zeros(m, n);
    let mut elements = alloc::vec![TableElement::new("one", ones.clone())];
    // (element index, level-2 image index)
    let mut images = alloc::vec![(0usize, 0usize)];
    let mut lifted = Vec::with_capacity(held.len());
    for (k, v) in held.iter().enumerate() {
        let w = top_ones.vstack(&lift_n(v))?;
        let wi = elements.len();
        elements.push(TableElement::new(format!("w{k}"), w.clone()));
        images.push((wi, wi));
        lifted.push((v.clone(), w));
        for (j, vp) in below[k].iter().enumerate() {
            elements.push(TableElement::new(format!("q{k}.{j}"), lift_n(vp).vstack(&zeros)?));
            images.push((elements.len() - 1, wi));
        }
        for (a, u) in row_side.iter().enumerate() {
            elements.push(TableElement::new(format!("p{a}.{k}"), lift_p(u).vstack(&-&lift_n(v))?));
            images.push((elements.len() - 1, wi));
        }
    }
    for (i, e) in elements.iter().enumerate() {
        if elements[..i].iter().any(|o| o.matrix == e.matrix) {
            return Err(Error::Unsupported("lifted matrices collide".into()));
        }
    }
    let mut table = TableFamily::new(elements, 2)?;
    for (i, target) in images {
        table.set_index(i, 1, 0)?;
        table.set_index(i, 2, target)?;
    }
    let table = table.with_negations()?;
    let reduced = GameInstance::new(
        PerceptionFamily::Table(table),
        ones,
        None,
        Capability::Finite(1),
        Capability::Finite(2),
    )?;
    Ok((reduced, ReductionMapping { rows: m, k_p, b_p, k_n, b_n, lifted }))
}

fn range(list: &[Matrix]) -> (f64, f64) {
    let all = list.iter().flat_map(|u| u.data().iter().copied());
    all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Maps an equilibrium of the reduced game back to the original one.
///
/// The row strategy is the renormalized first half of `x_bar`; the response to each original
/// matrix is the reduced response to the matrix standing for it.
pub fn map_back_equilibrium(
    reduced: &GameInstance,
    mapping: &ReductionMapping,
    x_bar: &[f64],
    ry_bar: &ResponseFunction,
) -> Result<(Vec<f64>, ResponseFunction)> {
    Simplex::new(2 * mapping.rows)?.check(x_bar, "reduced row strategy")?;
    let tail_mass: f64 = x_bar[mapping.rows..].iter().sum();
    if tail_mass > TAIL_TOL {
        return Err(Error::ReductionViolation { tail_mass });
    }
    let mut x = x_bar[..mapping.rows].to_vec();
    renormalize(&mut x);
    let mut responses = Vec::with_capacity(mapping.lifted.len());
    for (v, w) in &mapping.lifted {
        responses.push((v.clone(), ry_bar.respond(reduced, w)?));
    }
    Ok((x, ResponseFunction::Enumerated(responses)))
}
