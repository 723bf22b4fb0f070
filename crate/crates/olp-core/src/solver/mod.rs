//! The lower-capability player's maximin problem and the opponent's best responses.
//!
//! The maximin objective is `x ↦ min_k P⁻(u1, c1, x, e_k)`: the lower bound is concave in the
//! opponent's strategy, so the minimum over mixed strategies is attained at a pure column.

mod properties;

pub use properties::{
    check_axioms, check_constant_gap, check_narrowly_reversible, stackelberg_gap_probe,
    PropertyReport, StackelbergProbe, Verdict, Witness,
};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::bounds::{BoundModel, ACTIVE_TOL};
use crate::capability::Capability;
use crate::error::{invalid, Error, Result};
use crate::matrix::{unit, Matrix};
use crate::numerics::{maximize_min_affine, subgradient_maximize, Simplex, SubgradientReport};
use crate::perception::{
    narrow_set, perceive, validate_table_family, NarrowSet, PerceptionFamily,
};

/// Evaluation budget of the subgradient searches inside best responses.
pub const RESPONSE_ITERS: usize = 20_000;

/// A two-player game oriented so that the row player has the lower capability.
#[derive(Clone, Debug, PartialEq)]
pub struct GameInstance {
    pub family: PerceptionFamily,
    /// `u1`: the row player's view of their own payoff at level `c1`.
    pub perceived_row: Matrix,
    /// `v1`: the row player's view of the column payoff; `None` for zero-sum games.
    pub perceived_col: Option<Matrix>,
    pub c1: Capability,
    pub c2: Capability,
    pub true_row: Option<Matrix>,
    pub true_col: Option<Matrix>,
    /// Whether the players of the input were exchanged to put the lower capability first.
    pub swapped: bool,
}

impl GameInstance {
    /// Validates the input and swaps the players when the row player is the more capable one.
    ///
    /// `perceived_row` and `perceived_col` are the row player's views at `c_row`.
    pub fn new(
        family: PerceptionFamily,
        perceived_row: Matrix,
        perceived_col: Option<Matrix>,
        c_row: Capability,
        c_col: Capability,
    ) -> Result<GameInstance> {
        if let PerceptionFamily::Table(t) = &family {
            let report = validate_table_family(t);
            if let Some(v) = report.violations.first() {
                return Err(invalid(format!("table family is invalid: {v:?}")));
            }
        }
        if perceived_col.is_none() && !family.is_odd() {
            return Err(invalid("zero-sum games need an odd perception family"));
        }
        if let Some(col) = &perceived_col {
            if col.shape() != perceived_row.shape() {
                return Err(invalid("perceived matrices differ in shape"));
            }
        }
        check_fixed(&family, &perceived_row, c_row, "row")?;
        if let Some(col) = &perceived_col {
            check_fixed(&family, col, c_row, "column")?;
        }
        if c_row <= c_col {
            return Ok(GameInstance {
                family,
                perceived_row,
                perceived_col,
                c1: c_row,
                c2: c_col,
                true_row: None,
                true_col: None,
                swapped: false,
            });
        }
        // the column player sees the row player's views coarsened to their own level
        let row = perceive(&family, &perceived_row, c_col)?;
        let col = match &perceived_col {
            Some(col) => Some(perceive(&family, col, c_col)?),
            None => None,
        };
        let family = match family {
            PerceptionFamily::Table(t) => PerceptionFamily::Table(t.transposed()),
            other => other,
        };
        let (u1, v1) = match col {
            Some(col) => (col.transpose(), Some(row.transpose())),
            None => ((-&row).transpose(), None),
        };
        check_fixed(&family, &u1, c_col, "swapped row")?;
        Ok(GameInstance {
            family,
            perceived_row: u1,
            perceived_col: v1,
            c1: c_col,
            c2: c_row,
            true_row: None,
            true_col: None,
            swapped: true,
        })
    }

    /// Attaches true payoff matrices given in the input orientation.
    pub fn with_truth(mut self, true_row: Matrix, true_col: Option<Matrix>) -> Result<GameInstance> {
        let true_col = match (true_col, self.zero_sum()) {
            (Some(c), _) => c,
            (None, true) => -&true_row,
            (None, false) => return Err(invalid("general-sum games need both true matrices")),
        };
        let (row, col) =
            if self.swapped { (true_col.transpose(), true_row.transpose()) } else { (true_row, true_col) };
        if row.shape() != self.shape() || col.shape() != self.shape() {
            return Err(invalid("true matrices differ in shape from the perceived ones"));
        }
        if !self.family.same(&perceive(&self.family, &row, self.c1)?, &self.perceived_row) {
            return Err(invalid("true row matrix is not perceived as the given matrix"));
        }
        if !self.family.same(&perceive(&self.family, &col, self.c1)?, &self.opponent_view()) {
            return Err(invalid("true column matrix is not perceived as the given matrix"));
        }
        self.true_row = Some(row);
        self.true_col = Some(col);
        Ok(self)
    }

    pub fn zero_sum(&self) -> bool {
        self.perceived_col.is_none()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.perceived_row.shape()
    }

    /// The row player's view of the column payoff: `v1`, or `−u1` in zero-sum games.
    pub fn opponent_view(&self) -> Matrix {
        match &self.perceived_col {
            Some(v) => v.clone(),
            None => -&self.perceived_row,
        }
    }

    /// The matrix whose narrow set holds the perceptions the column player may have: `v1` in
    /// general-sum games, `u1` in zero-sum games.
    pub fn narrow_base(&self) -> &Matrix {
        self.perceived_col.as_ref().unwrap_or(&self.perceived_row)
    }

    pub fn narrow_set(&self) -> Result<NarrowSet> {
        narrow_set(&self.family, self.narrow_base(), self.c1, self.c2)
    }

    /// Bounds of the row player's own payoff at level `c1`.
    pub fn row_model(&self) -> Result<BoundModel> {
        BoundModel::new(&self.family, &self.perceived_row, self.c1)
    }

    /// The column player's response to holding `w` at level `c2`: the minimizer of the upper
    /// bound in zero-sum games, the maximizer of the lower bound otherwise.
    pub fn respond(&self, w: &Matrix, x: &[f64], tol: f64) -> Result<Vec<f64>> {
        if self.zero_sum() {
            best_response_upper(self, w, self.c2, x, tol)
        } else {
            best_response_lower(self, w, self.c2, x, tol)
        }
    }

    /// The payoff bound the column player optimizes when holding `w`.
    pub fn response_value(&self, w: &Matrix, x: &[f64], y: &[f64]) -> Result<f64> {
        let model = BoundModel::new(&self.family, w, self.c2)?;
        Ok(if self.zero_sum() { model.upper(x, y) } else { model.lower(x, y) })
    }
}

fn check_fixed(family: &PerceptionFamily, v: &Matrix, c: Capability, what: &str) -> Result<()> {
    if !v.is_finite() {
        return Err(invalid(format!("{what} matrix has non-finite entries")));
    }
    if !family.same(&perceive(family, v, c)?, v) {
        return Err(Error::InvalidPerceived(format!("{what} matrix is not a fixed point at level {c}")));
    }
    Ok(())
}

/// `min_k P⁻(u1, c1, x, e_k)` with a supergradient of the lowest-index active column.
pub fn maximin_objective(game: &GameInstance, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    let model = game.row_model()?;
    Simplex::new(game.shape().0)?.check(x, "row strategy")?;
    Ok(objective_with(&model, x))
}

fn objective_with(model: &BoundModel, x: &[f64]) -> (f64, Vec<f64>) {
    let n = model.shape().1;
    let values: Vec<f64> = (0..n).map(|k| model.lower(x, &unit(n, k))).collect();
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    let k = values.iter().position(|v| v - best <= ACTIVE_TOL).unwrap_or(0);
    (best, model.lower_grad_x(x, &unit(n, k)))
}

/// Outcome of [`solve_maximin`].
#[derive(Clone, Debug, PartialEq)]
pub struct MaximinSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub report: SubgradientReport,
}

/// Maximizes the maximin objective by projected subgradient ascent.
pub fn solve_maximin(game: &GameInstance, tol: f64, max_iters: usize, seed: u64) -> Result<MaximinSolution> {
    let model = game.row_model()?;
    let m = game.shape().0;
    let report = subgradient_maximize(|x| objective_with(&model, x), m, tol, max_iters, seed)?;
    Ok(MaximinSolution { x: report.argmax.clone(), value: report.value, report })
}

/// Exact maximin for families whose lower bound is a minimum of bilinear forms.
///
/// Returns `Unsupported` for the limited-rank family.
pub fn solve_maximin_exact(game: &GameInstance, tol: f64) -> Result<(Vec<f64>, f64)> {
    let model = game.row_model()?;
    let BoundModel::Envelope { lower, .. } = &model else {
        return Err(Error::Unsupported("exact maximin needs piecewise-bilinear bounds".into()));
    };
    let mut slopes = Vec::new();
    for mat in lower {
        for k in 0..mat.cols() {
            slopes.push(mat.column(k));
        }
    }
    let offsets = vec![0.0; slopes.len()];
    let best = maximize_min_affine(&slopes, &offsets, tol)?;
    Ok((best.argmax, best.value))
}

/// `argmin_y P⁺(v2, c2, x, y)`.
pub fn best_response_upper(
    game: &GameInstance,
    v2: &Matrix,
    c2: Capability,
    x: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    let model = BoundModel::new(&game.family, v2, c2)?;
    Simplex::new(v2.rows())?.check(x, "row strategy")?;
    optimize_response(&model, x, tol, Sense::MinUpper)
}

/// `argmax_y P⁻(v2, c2, x, y)`.
pub fn best_response_lower(
    game: &GameInstance,
    v2: &Matrix,
    c2: Capability,
    x: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    let model = BoundModel::new(&game.family, v2, c2)?;
    Simplex::new(v2.rows())?.check(x, "row strategy")?;
    optimize_response(&model, x, tol, Sense::MaxLower)
}

#[derive(Clone, Copy, PartialEq)]
enum Sense {
    MinUpper,
    MaxLower,
}

/// Column-player response for a fixed `x`, written as the maximization of a concave function.
fn optimize_response(model: &BoundModel, x: &[f64], tol: f64, sense: Sense) -> Result<Vec<f64>> {
    let n = model.shape().1;
    let score = |y: &[f64]| match sense {
        Sense::MinUpper => -model.upper(x, y),
        Sense::MaxLower => model.lower(x, y),
    };
    // best pure column, lowest index on ties
    let pure: Vec<f64> = (0..n).map(|k| score(&unit(n, k))).collect();
    let top = pure.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let k = pure.iter().position(|v| top - v <= ACTIVE_TOL).unwrap_or(0);
    let pieces = match sense {
        Sense::MinUpper => model.upper_pieces_in_y(x).map(|p| {
            p.into_iter().map(|row| row.into_iter().map(|a| -a).collect::<Vec<f64>>()).collect::<Vec<_>>()
        }),
        Sense::MaxLower => model.lower_pieces_in_y(x),
    };
    match pieces {
        // a single linear piece is maximized at a vertex
        Some(p) if p.len() == 1 => return Ok(unit(n, k)),
        Some(p) => {
            let offsets = vec![0.0; p.len()];
            match maximize_min_affine(&p, &offsets, tol) {
                Ok(best) if best.value > top + ACTIVE_TOL => return Ok(best.argmax),
                Ok(_) => return Ok(unit(n, k)),
                Err(Error::TooLarge { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        None => {}
    }
    let grad = |y: &[f64]| match sense {
        Sense::MinUpper => model.upper_grad_y(x, y).into_iter().map(|g| -g).collect(),
        Sense::MaxLower => model.lower_grad_y(x, y),
    };
    let report = subgradient_maximize(|y| (score(y), grad(y)), n, tol, RESPONSE_ITERS, 0)?;
    Ok(if report.value > top + ACTIVE_TOL { report.argmax } else { unit(n, k) })
}
