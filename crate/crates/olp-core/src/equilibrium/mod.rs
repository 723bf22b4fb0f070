//! Nash equilibria of games with perception.
//!
//! The column player's strategy is a response function: one mixed strategy for every matrix
//! they may hold. The row player evaluates a strategy `x` by the worst case over that set,
//! `f(x) = min_w P⁻(·, x, R(w))`, with the row player's own view `u1` at `c1` in general-sum
//! games and the held matrix `w` at `c2` in zero-sum games.

mod compact;
mod reduction;
mod search;

pub use compact::{build_compact_repr, eval_compact_repr, CompactResponseRepr};
pub use reduction::{map_back_equilibrium, reduce_general_to_zero_sum, ReductionMapping};
pub use search::{search_nash_table, NashCandidate, DEFAULT_GRID_RESOLUTION};

use alloc::vec::Vec;

use crate::bounds::BoundModel;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::numerics::{
    maximize_min_affine_lp, subgradient_maximize, Simplex, STRATEGY_TOL,
};
use crate::perception::NarrowSet;
use crate::solver::{solve_maximin, solve_maximin_exact, GameInstance};

/// Rounding allowance added to `eps` when deviations are compared.
pub const VERIFY_SLACK: f64 = 1e-9;

/// Budget of the subgradient searches used for limited-rank objectives.
const OBJECTIVE_ITERS: usize = 50_000;

/// The column player's strategy, one mixed response per matrix they may hold.
#[derive(Clone, Debug, PartialEq)]
pub enum ResponseFunction {
    Enumerated(Vec<(Matrix, Vec<f64>)>),
    Compact(CompactResponseRepr),
}

impl ResponseFunction {
    pub fn respond(&self, game: &GameInstance, u: &Matrix) -> Result<Vec<f64>> {
        match self {
            ResponseFunction::Enumerated(list) => list
                .iter()
                .find(|(w, _)| game.family.same(w, u))
                .map(|(_, y)| y.clone())
                .ok_or_else(|| Error::InvalidResponseFunction("no response for a narrow-set matrix".into())),
            ResponseFunction::Compact(repr) => eval_compact_repr(game, repr, u),
        }
    }
}

/// Outcome of [`verify_nash`].
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumReport {
    pub holds: bool,
    pub eps: f64,
    /// `max_x f(x) − f(x*)`.
    pub max_deviation_p1: f64,
    /// Largest gain any held matrix offers the column player over its assigned response.
    pub max_deviation_p2: f64,
    /// `f(x*)`.
    pub value: f64,
    pub best_value: f64,
    pub best_x: Vec<f64>,
    pub checked: usize,
    /// Whether every member of the narrow set was checked.
    pub exhaustive: bool,
    /// The held matrix with the largest column deviation.
    pub witness: Option<Matrix>,
}

/// The bound the row player's worst case is taken over when the column player holds `w`.
pub(crate) fn row_bound(game: &GameInstance, w: &Matrix) -> Result<BoundModel> {
    if game.zero_sum() {
        BoundModel::new(&game.family, w, game.c2)
    } else {
        game.row_model()
    }
}

/// `min` over the terms of `P⁻(x, y_w)`.
pub(crate) fn objective(terms: &[(BoundModel, Vec<f64>)], x: &[f64]) -> f64 {
    terms.iter().map(|(b, y)| b.lower(x, y)).fold(f64::INFINITY, f64::min)
}

/// Maximum of [`objective`] over the row player's simplex.
pub(crate) fn objective_max(terms: &[(BoundModel, Vec<f64>)], m: usize) -> Result<(f64, Vec<f64>)> {
    let mut slopes = Vec::new();
    for (b, y) in terms {
        match b.lower_pieces_in_x(y) {
            Some(p) => slopes.extend(p),
            None => return objective_max_subgradient(terms, m),
        }
    }
    let offsets = alloc::vec![0.0; slopes.len()];
    maximize_min_affine_lp(&slopes, &offsets)
}

fn objective_max_subgradient(terms: &[(BoundModel, Vec<f64>)], m: usize) -> Result<(f64, Vec<f64>)> {
    let eval = |x: &[f64]| {
        let (k, v) = terms
            .iter()
            .enumerate()
            .map(|(k, (b, y))| (k, b.lower(x, y)))
            .fold((0, f64::INFINITY), |a, c| if c.1 < a.1 { c } else { a });
        (v, terms[k].0.lower_grad_x(x, &terms[k].1))
    };
    let r = subgradient_maximize(eval, m, 1e-9, OBJECTIVE_ITERS, 0)?;
    Ok((r.value, r.argmax))
}

/// How much better than `y` the column player holding `w` could do against `x`.
pub(crate) fn column_deviation(game: &GameInstance, w: &Matrix, x: &[f64], y: &[f64]) -> Result<f64> {
    let model = BoundModel::new(&game.family, w, game.c2)?;
    let best = game.respond(w, x, 1e-12)?;
    let gap = if game.zero_sum() {
        model.upper(x, y) - model.upper(x, &best)
    } else {
        model.lower(x, &best) - model.lower(x, y)
    };
    Ok(gap.max(0.0))
}

/// Checks both equilibrium conditions for `(x*, R)` up to `eps`.
///
/// Enumerable narrow sets with at most `check_budget` members are checked exhaustively;
/// larger ones are checked on `check_budget` members chosen from `seed`. An enumerated
/// response function must cover the narrow set and may not name matrices outside it.
pub fn verify_nash(
    game: &GameInstance,
    x_star: &[f64],
    ry: &ResponseFunction,
    eps: f64,
    check_budget: usize,
    seed: u64,
) -> Result<EquilibriumReport> {
    let (m, n) = game.shape();
    Simplex::new(m)?.check(x_star, "row strategy")?;
    if !(eps >= 0.0) || check_budget == 0 {
        return Err(crate::error::invalid("eps must be non-negative and the budget positive"));
    }
    let narrow = game.narrow_set()?;
    let (elements, exhaustive) = checked_elements(game, &narrow, ry, check_budget, seed)?;
    let col_simplex = Simplex::new(n)?;
    let mut terms = Vec::with_capacity(elements.len());
    let mut dev2 = 0.0;
    let mut witness = None;
    for w in &elements {
        let y = ry.respond(game, w)?;
        if y.len() != n || !col_simplex.contains(&y, STRATEGY_TOL) {
            return Err(Error::InvalidResponseFunction("response is not a mixed strategy".into()));
        }
        let d = column_deviation(game, w, x_star, &y)?;
        if witness.is_none() || d > dev2 {
            dev2 = d;
            witness = Some(w.clone());
        }
        terms.push((row_bound(game, w)?, y));
    }
    let value = objective(&terms, x_star);
    let (best_value, best_x) = objective_max(&terms, m)?;
    let dev1 = (best_value - value).max(0.0);
    Ok(EquilibriumReport {
        holds: dev1 <= eps + VERIFY_SLACK && dev2 <= eps + VERIFY_SLACK,
        eps,
        max_deviation_p1: dev1,
        max_deviation_p2: dev2,
        value,
        best_value: best_value.max(value),
        best_x,
        checked: elements.len(),
        exhaustive,
        witness,
    })
}

fn checked_elements(
    game: &GameInstance,
    narrow: &NarrowSet,
    ry: &ResponseFunction,
    budget: usize,
    seed: u64,
) -> Result<(Vec<Matrix>, bool)> {
    if let ResponseFunction::Enumerated(list) = ry {
        for (w, _) in list {
            if !narrow.contains(w)? && !narrow_contains_approx(game, narrow, w) {
                return Err(Error::InvalidResponseFunction(
                    "response given for a matrix outside the narrow set".into(),
                ));
            }
        }
        if let NarrowSet::Parametric(_) = narrow {
            let mut domain: Vec<Matrix> = list.iter().map(|(w, _)| w.clone()).collect();
            domain.truncate(budget);
            return Ok((domain, false));
        }
    }
    match narrow {
        NarrowSet::Enumerated(list) if list.len() <= budget => Ok((list.clone(), true)),
        NarrowSet::Enumerated(list) => {
            // evenly spaced members, offset by the seed
            let offset = (seed as usize) % list.len();
            let picked =
                (0..budget).map(|k| list[(offset + k * list.len() / budget) % list.len()].clone()).collect();
            Ok((picked, false))
        }
        NarrowSet::Parametric(p) => Ok((p.sample(budget, seed)?, false)),
    }
}

fn narrow_contains_approx(game: &GameInstance, narrow: &NarrowSet, w: &Matrix) -> bool {
    match narrow {
        NarrowSet::Enumerated(list) => list.iter().any(|u| game.family.same(u, w)),
        NarrowSet::Parametric(_) => false,
    }
}

/// The three values compared by the zero-sum ordering: maximin, Nash and Stackelberg.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueOrdering {
    pub maximin: f64,
    pub nash: f64,
    pub stackelberg: f64,
    pub stackelberg_x: Vec<f64>,
}

impl ValueOrdering {
    pub fn holds(&self, tol: f64) -> bool {
        self.maximin <= self.nash + tol && self.nash <= self.stackelberg + tol
    }
}

/// Maximin value, `f(x*)` under `ry`, and the leader value
/// `sup_x min_w P⁻(w, c2, x, R(w, x))`.
///
/// The leader's response rule plays `ry` at `x*` and the lowest-index best response
/// elsewhere; the supremum is taken over `x*` and the grid of the given resolution.
pub fn value_ordering(
    game: &GameInstance,
    x_star: &[f64],
    ry: &ResponseFunction,
    resolution: usize,
) -> Result<ValueOrdering> {
    if !game.zero_sum() {
        return Err(Error::Unsupported("the value ordering is stated for zero-sum games".into()));
    }
    let (m, _) = game.shape();
    Simplex::new(m)?.check(x_star, "row strategy")?;
    let NarrowSet::Enumerated(elements) = game.narrow_set()? else {
        return Err(Error::Unsupported("the value ordering needs an enumerable narrow set".into()));
    };
    let maximin = match solve_maximin_exact(game, 1e-12) {
        Ok((_, v)) => v,
        Err(Error::Unsupported(_)) => solve_maximin(game, 1e-9, OBJECTIVE_ITERS, 0)?.value,
        Err(e) => return Err(e),
    };
    let models: Vec<BoundModel> = elements.iter().map(|w| row_bound(game, w)).collect::<Result<_>>()?;
    let mut nash = f64::INFINITY;
    for (w, b) in elements.iter().zip(&models) {
        nash = nash.min(b.lower(x_star, &ry.respond(game, w)?));
    }
    let mut stackelberg = nash;
    let mut stackelberg_x = x_star.to_vec();
    for x in Simplex::new(m)?.grid(resolution.max(1)) {
        let mut g = f64::INFINITY;
        for (w, b) in elements.iter().zip(&models) {
            g = g.min(b.lower(&x, &game.respond(w, &x, 1e-12)?));
        }
        if g > stackelberg {
            stackelberg = g;
            stackelberg_x = x;
        }
    }
    Ok(ValueOrdering { maximin, nash, stackelberg, stackelberg_x })
}
