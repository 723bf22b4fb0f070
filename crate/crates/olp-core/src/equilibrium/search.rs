//! Brute-force equilibrium search for games whose narrow set can be listed.
//!
//! Candidate row strategies are, in order: points where the column player is indifferent
//! between two pure columns on enough hyperplanes to pin a point of a simplex face, the
//! uniform grid, the row player's exact best replies to the responses found at grid points,
//! and finally a pattern search started from the best rejected candidates. At each candidate
//! every held matrix answers with a best response; when several are optimal, a linear program
//! picks a starting mixture and a pattern search over the mixing weights makes the candidate
//! as nearly optimal for the row player as it can.

use alloc::vec;
use alloc::vec::Vec;

use super::{objective, objective_max, row_bound, verify_nash, EquilibriumReport, ResponseFunction};
use crate::bounds::BoundModel;
use crate::error::{invalid, Error, Result};
use crate::matrix::{dot, Matrix};
use crate::numerics::{maximize_min_affine, solve_linear, Combinations, LinearProgram, LpOutcome, Simplex};
use crate::perception::{NarrowSet, PerceptionFamily};
use crate::solver::GameInstance;

pub const DEFAULT_GRID_RESOLUTION: usize = 64;

/// Largest number of square systems tried while locating indifference points.
const MAX_SYSTEMS: usize = 200_000;
/// Largest grid the search will walk.
const MAX_GRID: f64 = 2_000_000.0;
const MAX_REPLIES: usize = 4_096;
const LEVEL_SCAN: usize = 32;
const GOLDEN_STEPS: usize = 90;
/// Number of best rejected candidates the refinement pass starts from.
const REFINE_STARTS: usize = 8;
const REFINE_FLOOR: f64 = 1e-13;
const REFINE_BUDGET: usize = 20_000;
const MIX_FLOOR: f64 = 1e-13;
const MIX_BUDGET: usize = 2_000;

/// A strategy pair accepted by [`search_nash_table`].
#[derive(Clone, Debug, PartialEq)]
pub struct NashCandidate {
    pub x: Vec<f64>,
    pub responses: ResponseFunction,
    pub report: EquilibriumReport,
    /// Number of row strategies evaluated.
    pub tried: usize,
}

struct Element {
    matrix: Matrix,
    /// Linear pieces of the column player's objective, taken as a minimum after sign fixing.
    response: Vec<Matrix>,
    response_sign: f64,
    row: BoundModel,
    row_pieces: Vec<Matrix>,
}

struct Evaluation {
    ys: Vec<Vec<f64>>,
    dev1: f64,
    dev2: f64,
    best_x: Vec<f64>,
}

struct Search<'a> {
    game: &'a GameInstance,
    elements: Vec<Element>,
    m: usize,
    n: usize,
    tie_tol: f64,
}

/// Searches for an `eps`-equilibrium of a game whose narrow set is enumerable and whose
/// bounds are piecewise bilinear.
///
/// Returns `NotFound` when no candidate passes; a finer grid may then help.
pub fn search_nash_table(game: &GameInstance, resolution: usize, eps: f64) -> Result<NashCandidate> {
    if resolution == 0 || !(eps > 0.0) {
        return Err(invalid("the grid resolution and eps must be positive"));
    }
    let search = Search::new(game, eps)?;
    let mut tried = 0;
    let mut replies: Vec<Vec<f64>> = Vec::new();
    let mut starts: Vec<(f64, Vec<f64>)> = Vec::new();
    for x in search.indifference_points()? {
        tried += 1;
        if let Some(found) = search.attempt(&x, eps, tried, Some(&mut replies), &mut starts)? {
            return Ok(found);
        }
    }
    let simplex = Simplex::new(search.m)?;
    let size = simplex.grid_size(resolution);
    if size > MAX_GRID {
        return Err(Error::TooLarge { size, cap: MAX_GRID as usize });
    }
    for x in simplex.grid(resolution) {
        tried += 1;
        if let Some(found) = search.attempt(&x, eps, tried, Some(&mut replies), &mut starts)? {
            return Ok(found);
        }
    }
    for x in core::mem::take(&mut replies) {
        tried += 1;
        if let Some(found) = search.attempt(&x, eps, tried, None, &mut starts)? {
            return Ok(found);
        }
    }
    for (_, start) in core::mem::take(&mut starts) {
        let (x, evaluations) = search.refine(start, 1.0 / resolution as f64)?;
        tried += evaluations;
        if let Some(found) = search.attempt(&x, eps, tried, None, &mut Vec::new())? {
            return Ok(found);
        }
    }
    Err(Error::NotFound)
}

impl<'a> Search<'a> {
    fn new(game: &'a GameInstance, eps: f64) -> Result<Self> {
        if matches!(game.family, PerceptionFamily::LimitedRank(_)) {
            return Err(Error::Unsupported("equilibrium search needs piecewise-bilinear bounds".into()));
        }
        let NarrowSet::Enumerated(list) = game.narrow_set()? else {
            return Err(Error::Unsupported("equilibrium search needs an enumerable narrow set".into()));
        };
        let (m, n) = game.shape();
        let mut elements = Vec::with_capacity(list.len());
        for w in list {
            let held = BoundModel::new(&game.family, &w, game.c2)?;
            let row = row_bound(game, &w)?;
            let (BoundModel::Envelope { lower, upper }, BoundModel::Envelope { lower: row_pieces, .. }) =
                (held, row.clone())
            else {
                return Err(Error::Unsupported("equilibrium search needs piecewise-bilinear bounds".into()));
            };
            let (response, response_sign) = if game.zero_sum() { (upper, -1.0) } else { (lower, 1.0) };
            elements.push(Element { matrix: w, response, response_sign, row, row_pieces });
        }
        Ok(Search { game, elements, m, n, tie_tol: eps / 4.0 })
    }

    fn response_pieces(&self, e: &Element, x: &[f64]) -> Vec<Vec<f64>> {
        e.response.iter().map(|mat| mat.tmul_vec(x).into_iter().map(|v| e.response_sign * v).collect()).collect()
    }

    /// The column player's best achievable score and the vertices of the near-optimal face.
    fn face(&self, e: &Element, x: &[f64]) -> Result<(f64, Vec<Vec<f64>>)> {
        let pieces = self.response_pieces(e, x);
        let best = maximize_min_affine(&pieces, &vec![0.0; pieces.len()], self.tie_tol)?;
        Ok((best.value, best.vertices))
    }

    fn response_score(&self, e: &Element, x: &[f64], y: &[f64]) -> f64 {
        self.response_pieces(e, x).iter().map(|p| dot(p, y)).fold(f64::INFINITY, f64::min)
    }

    fn attempt(
        &self,
        x: &[f64],
        eps: f64,
        tried: usize,
        replies: Option<&mut Vec<Vec<f64>>>,
        starts: &mut Vec<(f64, Vec<f64>)>,
    ) -> Result<Option<NashCandidate>> {
        let ev = self.evaluate(x)?;
        if ev.dev1 > eps || ev.dev2 > eps {
            if let Some(queue) = replies {
                if queue.len() < MAX_REPLIES && !queue.iter().any(|q| linf(q, &ev.best_x) <= 1e-12) {
                    queue.push(ev.best_x);
                }
            }
            let worst = ev.dev1.max(ev.dev2);
            let at = starts.partition_point(|(d, _)| *d <= worst);
            if at < REFINE_STARTS {
                starts.insert(at, (worst, x.to_vec()));
                starts.truncate(REFINE_STARTS);
            }
            return Ok(None);
        }
        // move to the exact best reply when the responses stay optimal there
        let mut x = x.to_vec();
        if ev.dev1 > 0.0 {
            let polished = self.score(&ev.best_x, ev.ys.clone())?;
            if polished.dev2 <= eps && polished.dev1 <= ev.dev1 {
                x = ev.best_x.clone();
            }
        }
        let responses = ResponseFunction::Enumerated(
            self.elements.iter().zip(&ev.ys).map(|(e, y)| (e.matrix.clone(), y.clone())).collect(),
        );
        let report = verify_nash(self.game, &x, &responses, eps, usize::MAX, 0)?;
        if !report.holds {
            return Ok(None);
        }
        Ok(Some(NashCandidate { x, responses, report, tried }))
    }

    /// Pattern search along the edge directions `e_i − e_j` of the simplex, minimizing the
    /// larger of the two deviations; the step halves whenever no direction improves.
    fn refine(&self, start: Vec<f64>, step: f64) -> Result<(Vec<f64>, usize)> {
        let deviation = |x: &[f64]| -> Result<f64> {
            let ev = self.evaluate(x)?;
            Ok(ev.dev1.max(ev.dev2))
        };
        let mut x = start;
        let mut current = deviation(&x)?;
        let mut h = step;
        let mut evaluations = 1;
        while h > REFINE_FLOOR && current > REFINE_FLOOR && evaluations < REFINE_BUDGET {
            let mut improved = false;
            for i in 0..self.m {
                for j in 0..self.m {
                    let moved = h.min(x[j]);
                    if i == j || moved <= 0.0 {
                        continue;
                    }
                    let mut trial = x.clone();
                    trial[i] += moved;
                    trial[j] -= moved;
                    let d = deviation(&trial)?;
                    evaluations += 1;
                    if d < current {
                        x = trial;
                        current = d;
                        improved = true;
                    }
                }
            }
            if !improved {
                h *= 0.5;
            }
        }
        Ok((x, evaluations))
    }

    fn evaluate(&self, x: &[f64]) -> Result<Evaluation> {
        let mut faces = Vec::with_capacity(self.elements.len());
        for e in &self.elements {
            let (_, mut vertices) = self.face(e, x)?;
            // mixing is irrelevant when every vertex gives the row player the same vectors
            let same = e.row_pieces.iter().all(|mat| {
                let first = mat.mul_vec(&vertices[0]);
                vertices.iter().all(|v| linf(&mat.mul_vec(v), &first) <= 1e-12)
            });
            if same {
                vertices.truncate(1);
            }
            faces.push(vertices);
        }
        if faces.iter().all(|f| f.len() == 1) {
            let ys = faces.into_iter().map(|mut f| f.swap_remove(0)).collect();
            return self.score(x, ys);
        }
        let weights = self.mix(x, &faces)?;
        self.polish_mixture(x, &faces, weights)
    }

    /// Pattern search over the mixing weights of every multi-vertex face, minimizing the row
    /// player's deviation.
    fn polish_mixture(&self, x: &[f64], faces: &[Vec<Vec<f64>>], mut weights: Vec<Vec<f64>>) -> Result<Evaluation> {
        let build = |w: &[Vec<f64>]| -> Vec<Vec<f64>> { faces.iter().zip(w).map(|(f, a)| combine(f, a)).collect() };
        let mut current = self.score(x, build(&weights))?;
        let mut h = 0.25;
        let mut evaluations = 0;
        while h > MIX_FLOOR && current.dev1 > MIX_FLOOR && evaluations < MIX_BUDGET {
            let mut improved = false;
            for k in 0..faces.len() {
                for i in 0..faces[k].len() {
                    for j in 0..faces[k].len() {
                        let moved = h.min(weights[k][j]);
                        if i == j || moved <= 0.0 {
                            continue;
                        }
                        let mut trial = weights.clone();
                        trial[k][i] += moved;
                        trial[k][j] -= moved;
                        let ev = self.score(x, build(&trial))?;
                        evaluations += 1;
                        if ev.dev1 < current.dev1 {
                            weights = trial;
                            current = ev;
                            improved = true;
                        }
                    }
                }
            }
            if !improved {
                h *= 0.5;
            }
        }
        Ok(current)
    }

    fn score(&self, x: &[f64], ys: Vec<Vec<f64>>) -> Result<Evaluation> {
        let terms: Vec<(BoundModel, Vec<f64>)> =
            self.elements.iter().zip(&ys).map(|(e, y)| (e.row.clone(), y.clone())).collect();
        let value = objective(&terms, x);
        let (best, best_x) = objective_max(&terms, self.m)?;
        let mut dev2: f64 = 0.0;
        for (e, y) in self.elements.iter().zip(&ys) {
            let (top, _) = self.face(e, x)?;
            dev2 = dev2.max(top - self.response_score(e, x, y));
        }
        Ok(Evaluation { ys, dev1: (best - value).max(0.0), dev2, best_x })
    }

    /// Chooses mixing weights on every optimal face so that some supergradient `z` of the row
    /// player's objective at `x` has `max_i z_i` as close as possible to the objective value.
    ///
    /// With the objective level `t` fixed the choice is a linear program over weights
    /// `β[e, M, j] = λ[e, M] · α[e, j]`; the level is then scanned and refined by golden
    /// section.
    fn mix(&self, x: &[f64], faces: &[Vec<Vec<f64>>]) -> Result<Vec<Vec<f64>>> {
        struct Var {
            element: usize,
            vertex: usize,
            image: Vec<f64>,
        }
        let mut vars = Vec::new();
        // per element: (row values xᵀ M v_j for each M, then j), best point of the face
        let mut levels: Vec<Option<Vec<Vec<f64>>>> = Vec::with_capacity(faces.len());
        let mut preferred = Vec::with_capacity(faces.len());
        let mut cap = f64::INFINITY;
        let mut floor = f64::INFINITY;
        for (k, (e, face)) in self.elements.iter().zip(faces).enumerate() {
            for mat in &e.row_pieces {
                for (j, v) in face.iter().enumerate() {
                    vars.push(Var { element: k, vertex: j, image: mat.mul_vec(v) });
                }
            }
            if face.len() == 1 {
                cap = cap.min(e.row.lower(x, &face[0]));
                levels.push(None);
                preferred.push(vec![1.0]);
                continue;
            }
            let values: Vec<Vec<f64>> =
                e.row_pieces.iter().map(|mat| face.iter().map(|v| mat.bilinear(x, v)).collect()).collect();
            let best = maximize_min_affine(&values, &vec![0.0; values.len()], 1e-12)?;
            cap = cap.min(best.value);
            floor = floor.min(values.iter().flatten().copied().fold(f64::INFINITY, f64::min));
            preferred.push(best.argmax);
            levels.push(Some(values));
        }
        let floor = floor.min(cap);
        let solve_at = |t: f64| -> Result<Option<(f64, Vec<f64>)>> {
            let nv = vars.len();
            let mut c = vec![0.0; nv + 2];
            c[nv] = 1.0;
            c[nv + 1] = -1.0;
            let mut lp = LinearProgram::new(c);
            for i in 0..self.m {
                let mut row: Vec<f64> = vars.iter().map(|v| v.image[i]).collect();
                row.extend([-1.0, 1.0]);
                lp.less_eq(row, t);
            }
            for (k, lv) in levels.iter().enumerate() {
                let Some(values) = lv else { continue };
                for per_piece in values {
                    let mut row: Vec<f64> = vars
                        .iter()
                        .map(|v| if v.element == k { t - per_piece[v.vertex] } else { 0.0 })
                        .collect();
                    row.extend([0.0, 0.0]);
                    lp.less_eq(row, 0.0);
                }
            }
            let mut ones = vec![1.0; nv];
            ones.extend([0.0, 0.0]);
            lp.equals(ones, 1.0);
            Ok(match lp.solve()? {
                LpOutcome::Optimal { z, value } => Some((value, z)),
                _ => None,
            })
        };
        let eval = |t: f64| -> Result<(f64, Option<Vec<f64>>)> {
            Ok(match solve_at(t)? {
                Some((s, z)) => (s, Some(z)),
                None => (f64::INFINITY, None),
            })
        };
        let mut best = (cap, eval(cap)?);
        if best.1 .0 > 0.0 && cap > floor {
            let step = (cap - floor) / LEVEL_SCAN as f64;
            let mut at = LEVEL_SCAN;
            for k in 0..LEVEL_SCAN {
                let t = floor + step * k as f64;
                let r = eval(t)?;
                if r.0 < best.1 .0 {
                    best = (t, r);
                    at = k;
                }
            }
            let (mut lo, mut hi) = (floor + step * at.saturating_sub(1) as f64, (best.0 + step).min(cap));
            let phi = 0.5 * (libm::sqrt(5.0) - 1.0);
            let mut a = hi - phi * (hi - lo);
            let mut b = lo + phi * (hi - lo);
            let mut ra = eval(a)?;
            let mut rb = eval(b)?;
            for _ in 0..GOLDEN_STEPS {
                if ra.0 <= rb.0 {
                    hi = b;
                    b = a;
                    rb = ra;
                    a = hi - phi * (hi - lo);
                    ra = eval(a)?;
                } else {
                    lo = a;
                    a = b;
                    ra = rb;
                    b = lo + phi * (hi - lo);
                    rb = eval(b)?;
                }
                for (t, r) in [(a, &ra), (b, &rb)] {
                    if r.0 < best.1 .0 {
                        best = (t, r.clone());
                    }
                }
            }
        }
        let Some(z) = best.1 .1 else { return Ok(preferred) };
        let mut mixes = preferred;
        for (k, face) in faces.iter().enumerate() {
            let mut weights = vec![0.0; face.len()];
            for (v, &b) in vars.iter().zip(&z) {
                if v.element == k {
                    weights[v.vertex] += b;
                }
            }
            let total: f64 = weights.iter().sum();
            if total > 1e-12 {
                weights.iter_mut().for_each(|w| *w /= total);
                mixes[k] = weights;
            }
        }
        Ok(mixes)
    }

    /// Points of simplex faces cut out by column-indifference hyperplanes.
    fn indifference_points(&self) -> Result<Vec<Vec<f64>>> {
        let mut planes: Vec<Vec<f64>> = Vec::new();
        for e in &self.elements {
            for mat in &e.response {
                for j in 0..self.n {
                    for k in j + 1..self.n {
                        let mut a: Vec<f64> = (0..self.m).map(|i| mat.row(i)[j] - mat.row(i)[k]).collect();
                        let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs()));
                        if scale <= 1e-12 {
                            continue;
                        }
                        let lead = a.iter().copied().find(|v| v.abs() > 1e-12).unwrap_or(1.0).signum();
                        a.iter_mut().for_each(|v| *v *= lead / scale);
                        if !planes.iter().any(|p| linf(p, &a) <= 1e-12) {
                            planes.push(a);
                        }
                    }
                }
            }
        }
        let mut out: Vec<Vec<f64>> = Vec::new();
        let mut systems = 0;
        for size in 1..=self.m {
            for support in Combinations::new(self.m, size) {
                for chosen in Combinations::new(planes.len(), size - 1) {
                    systems += 1;
                    if systems > MAX_SYSTEMS {
                        return Ok(out);
                    }
                    let mut a = Vec::with_capacity(size * size);
                    for &p in &chosen {
                        a.extend(support.iter().map(|&i| planes[p][i]));
                    }
                    a.extend(core::iter::repeat(1.0).take(size));
                    let mut b = vec![0.0; size];
                    b[size - 1] = 1.0;
                    let Some(sol) = solve_linear(a, b, size) else { continue };
                    if sol.iter().any(|&v| v < -1e-12) {
                        continue;
                    }
                    let mut x = vec![0.0; self.m];
                    for (&i, &v) in support.iter().zip(&sol) {
                        x[i] = v.max(0.0);
                    }
                    let total: f64 = x.iter().sum();
                    x.iter_mut().for_each(|v| *v /= total);
                    if !out.iter().any(|o| linf(o, &x) <= 1e-12) {
                        out.push(x);
                    }
                }
            }
        }
        Ok(out)
    }
}

fn combine(points: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; points[0].len()];
    for (p, &w) in points.iter().zip(weights) {
        y.iter_mut().zip(p).for_each(|(a, b)| *a += w * b);
    }
    y
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
