//! Numerical checks of structural properties: perception axioms, constant gap, narrow
//! reversibility and the gap between the maximin and Stackelberg objectives.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{maximin_objective, GameInstance};
use crate::bounds::{extremal_concretization_limited_rank, BoundModel, ACTIVE_TOL};
use crate::capability::Capability;
use crate::error::{invalid, Error, Result};
use crate::matrix::{unit, Matrix};
use crate::numerics::{canonical_svd, Simplex};
use crate::perception::{
    narrow_set_with_cap, perceive, quantized, sample_concretization, validate_table_family,
    validate_table_oddness, MaskShape, NarrowSet, PerceptionFamily,
};

/// Largest narrow set enumerated by the property checks before they fall back to sampling.
pub const CHECK_ENUMERATION_CAP: usize = 10_000;

/// Witnesses kept per report.
pub const MAX_WITNESSES: usize = 20;

const SHRINK: f64 = 1.0 - 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    HoldsUpToTolerance,
    HoldsUpToSampling,
    Fails,
    NotApplicable,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::HoldsUpToTolerance => "holds-up-to-tolerance",
            Verdict::HoldsUpToSampling => "holds-up-to-sampling",
            Verdict::Fails => "fails",
            Verdict::NotApplicable => "not-applicable",
        }
    }

    pub fn passed(self) -> bool {
        !matches!(self, Verdict::Fails)
    }
}

/// Inputs that reproduce one measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub label: String,
    pub seed: u64,
    pub matrix: Matrix,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyReport {
    pub property: &'static str,
    pub verdict: Verdict,
    pub trials: usize,
    /// Largest deviation from the property over all applicable trials.
    pub max_gap: f64,
    /// Violations, capped at [`MAX_WITNESSES`].
    pub witnesses: Vec<Witness>,
    /// Measurements outside the property's scope, reported separately.
    pub exceptions: Vec<Witness>,
    /// Known result that turns a sampled verdict into a guarantee, if one applies.
    pub guarantee: Option<&'static str>,
    pub notes: Vec<String>,
}

impl PropertyReport {
    fn new(property: &'static str) -> Self {
        PropertyReport {
            property,
            verdict: Verdict::Holds,
            trials: 0,
            max_gap: 0.0,
            witnesses: Vec::new(),
            exceptions: Vec::new(),
            guarantee: None,
            notes: Vec::new(),
        }
    }

    fn fail(&mut self, w: Witness) {
        self.verdict = Verdict::Fails;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(w);
        }
    }

    fn except(&mut self, w: Witness) {
        if self.exceptions.len() < MAX_WITNESSES {
            self.exceptions.push(w);
        }
    }

    /// Final verdict for a passing run: exact, or within tolerance.
    fn settle(&mut self) {
        if self.verdict == Verdict::Holds && self.max_gap > 0.0 {
            self.verdict = Verdict::HoldsUpToTolerance;
        }
    }
}

fn trial_rng(seed: u64, trial: usize) -> (u64, ChaCha8Rng) {
    let s = seed.wrapping_add(trial as u64);
    (s, ChaCha8Rng::seed_from_u64(s))
}

/// Short decimals with zeros and tied magnitudes, or well-conditioned reals for limited rank.
fn random_matrix(family: &PerceptionFamily, rng: &mut ChaCha8Rng, m: usize, n: usize) -> Matrix {
    if let PerceptionFamily::LimitedRank(lr) = family {
        loop {
            let u = Matrix::new(m, n, (0..m * n).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .expect("shape matches");
            let s = canonical_svd(&u, lr.tie_tol).sigma;
            if s.windows(2).all(|w| w[0] - w[1] > 1e-6) && s.last().is_some_and(|&v| v > 1e-3) {
                return u;
            }
        }
    }
    let data = (0..m * n)
        .map(|_| match rng.gen_range(0..6) {
            0 => 0.0,
            1 => 1.25,
            2 => -1.25,
            _ => {
                let digits = rng.gen_range(0..=6);
                let scale = libm::pow(10.0, digits as f64);
                let k = rng.gen_range(-3 * scale as i64..=3 * scale as i64);
                format!("{}", k as f64 / scale).parse().expect("decimal parses")
            }
        })
        .collect();
    Matrix::new(m, n, data).expect("shape matches")
}

/// Samples matrices of the given shape and levels in `1..=6` and checks path independence,
/// idempotence, identity at infinity and oddness of `family`.
///
/// Table families are validated exhaustively instead; oddness violations only fail the check
/// when `require_odd` is set.
pub fn check_axioms(
    family: &PerceptionFamily,
    shape: (usize, usize),
    n_trials: usize,
    seed: u64,
    require_odd: bool,
) -> PropertyReport {
    let mut report = PropertyReport::new("axioms");
    if let PerceptionFamily::Table(t) = family {
        report.trials = t.len();
        for v in validate_table_family(t).violations {
            report.verdict = Verdict::Fails;
            report.notes.push(format!("{v:?}"));
        }
        for v in validate_table_oddness(t).violations {
            if require_odd {
                report.verdict = Verdict::Fails;
            }
            report.notes.push(format!("oddness: {v:?}"));
        }
        return report;
    }
    let (m, n) = shape;
    let tolerance = if family.is_approximate() { 1e-9 } else { 0.0 };
    for trial in 0..n_trials {
        let (s, mut rng) = trial_rng(seed, trial);
        let u = random_matrix(family, &mut rng, m, n);
        let a = Capability::Finite(rng.gen_range(1..=6));
        let b = Capability::Finite(rng.gen_range(1..=6));
        report.trials += 1;
        let outcome = (|| -> Result<Vec<(String, Matrix, Matrix)>> {
            let fa = perceive(family, &u, a)?;
            let fb = perceive(family, &u, b)?;
            Ok(vec![
                (format!("path independence at ({a}, {b})"), perceive(family, &fb, a)?, perceive(family, &u, a.min(b))?),
                (format!("path independence at ({b}, {a})"), perceive(family, &fa, b)?, perceive(family, &u, a.min(b))?),
                (format!("idempotence at {a}"), perceive(family, &fa, a)?, fa.clone()),
                (String::from("identity at infinity"), perceive(family, &u, Capability::Infinite)?, u.clone()),
                (format!("oddness at {a}"), perceive(family, &-&u, a)?, -&fa),
            ])
        })();
        match outcome {
            Ok(checks) => {
                for (label, got, expected) in checks {
                    let gap = got.frobenius_distance(&expected);
                    report.max_gap = report.max_gap.max(gap);
                    if gap > tolerance {
                        report.fail(Witness { label, seed: s, matrix: u.clone(), x: vec![], y: vec![], gap });
                    }
                }
            }
            Err(e) => {
                report.notes.push(format!("trial {trial}: {e}"));
                report.except(Witness { label: format!("{e}"), seed: s, matrix: u, x: vec![], y: vec![], gap: f64::NAN });
            }
        }
    }
    report.settle();
    report
}

/// Tests whether `P⁺ − P⁻` depends only on the level `c` for random perceived matrices and
/// strategy pairs.
///
/// For the quantized family the expected gap is `10^-c` on matrices without zero entries;
/// matrices with zeros are listed as exceptions with their measured gap. Other families are
/// compared against the gap measured in the first trial.
pub fn check_constant_gap(family: &PerceptionFamily, c: Capability, n_trials: usize, seed: u64) -> PropertyReport {
    let mut report = PropertyReport::new("constant-gap");
    let expected = match family {
        PerceptionFamily::Quantized => Some(quantized::cell_width(c)),
        _ => None,
    };
    let mut reference: Option<f64> = expected;
    for trial in 0..n_trials {
        let (s, mut rng) = trial_rng(seed, trial);
        let sample = (|| -> Result<Matrix> {
            match family {
                PerceptionFamily::Table(t) => {
                    let i = rng.gen_range(0..t.len());
                    Ok(t.matrix(t.image(i, c)?).clone())
                }
                PerceptionFamily::Quantized => {
                    let (m, n) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
                    let delta = quantized::cell_width(c).max(1e-6);
                    let data = (0..m * n)
                        .map(|_| {
                            // one entry in ten falls inside the zero cell
                            if rng.gen_range(0..10) == 0 {
                                rng.gen_range(-delta * 0.9..delta * 0.9)
                            } else {
                                rng.gen_range(-2.0..2.0)
                            }
                        })
                        .collect();
                    perceive(family, &Matrix::new(m, n, data)?, c)
                }
                _ => {
                    let (m, n) = (rng.gen_range(2..=5), rng.gen_range(2..=5));
                    let u = random_matrix(family, &mut rng, m, n);
                    perceive(family, &u, c)
                }
            }
        })();
        let v = match sample {
            Ok(v) => v,
            Err(e) => {
                report.notes.push(format!("trial {trial}: {e}"));
                continue;
            }
        };
        let model = match BoundModel::new(family, &v, c) {
            Ok(model) => model,
            Err(e) => {
                report.notes.push(format!("trial {trial}: {e}"));
                continue;
            }
        };
        let x = Simplex::new(v.rows()).expect("nonempty").sample(&mut rng);
        let y = Simplex::new(v.cols()).expect("nonempty").sample(&mut rng);
        let width = model.bounds(&x, &y).width();
        report.trials += 1;
        let witness = |label: &str, gap: f64| Witness {
            label: String::from(label),
            seed: s,
            matrix: v.clone(),
            x: x.clone(),
            y: y.clone(),
            gap,
        };
        if expected.is_some() && v.data().contains(&0.0) {
            report.except(witness("zero entries widen the gap", width));
            continue;
        }
        let target = *reference.get_or_insert(width);
        let deviation = (width - target).abs();
        report.max_gap = report.max_gap.max(deviation);
        if deviation > 1e-12 {
            if report.witnesses.is_empty() && expected.is_none() {
                report.notes.push(format!("reference gap {target} from the first trial"));
            }
            report.fail(witness("gap differs from the reference", width));
        }
    }
    if report.trials == 0 {
        report.verdict = Verdict::NotApplicable;
    }
    report.settle();
    if report.verdict.passed() && expected.is_some() {
        report.guarantee = Some("constant-gap games are maximin-attainable");
    }
    if !report.exceptions.is_empty() {
        report.notes.push(format!("{} matrices with zero entries reported separately", report.exceptions.len()));
    }
    report
}

/// A narrow-set element whose upper bound at `(x, e_k)` approaches `P⁻(u1, c1, x, e_k)`, when
/// the family has a closed-form one; `Ok(None)` when none applies to this column.
fn lower_witness(game: &GameInstance, x: &[f64], k: usize) -> Result<Option<Matrix>> {
    let u1 = &game.perceived_row;
    let (c1, c2) = (game.c1, game.c2);
    if c1 >= c2 {
        return Ok(Some(u1.clone()));
    }
    match &game.family {
        PerceptionFamily::Masked => {
            let Some(shape) = MaskShape::of(u1, c1) else { return Ok(Some(u1.clone())) };
            let n = u1.cols();
            let column: Vec<usize> = shape.masked.iter().copied().filter(|i| i % n == k).collect();
            if let (Capability::Finite(a), Capability::Finite(b)) = (c1, c2) {
                if column.len() > (b - a) as usize {
                    return Ok(None);
                }
            }
            let mut u = u1.clone();
            for i in column {
                let (limit, closed) = shape.limit(i);
                u.data_mut()[i] = -if closed { limit } else { limit * SHRINK };
            }
            Ok(Some(u))
        }
        PerceptionFamily::LimitedRank(lr) => {
            let f = canonical_svd(u1, lr.tie_tol);
            let r = f.rank(lr.rank_tol);
            let (m, n) = u1.shape();
            if r == 0 || Capability::Finite(r as u32) != c1 || r >= m.min(n) {
                return Ok(Some(u1.clone()));
            }
            let q = -f.sigma[r - 1] * SHRINK;
            match extremal_concretization_limited_rank(u1, r, x, &unit(n, k), q) {
                Ok(u) => Ok(Some(u)),
                Err(Error::DegenerateDirection) => Ok(Some(u1.clone())),
                Err(e) => Err(e),
            }
        }
        PerceptionFamily::Quantized => Ok(Some(quantized_floor(u1, c1, c2))),
        PerceptionFamily::Table(_) => Ok(None),
    }
}

/// Entrywise smallest member of the quantized narrow set.
fn quantized_floor(u1: &Matrix, c1: Capability, c2: Capability) -> Matrix {
    match (c1, c2) {
        (Capability::Finite(a), Capability::Finite(b)) => {
            let b = b.min(quantized::MAX_DIGITS as u32).max(a);
            u1.map(|w| quantized::preimage_floor(w, a, b))
        }
        _ => {
            let delta = quantized::cell_width(c1) * SHRINK;
            u1.map(|w| if w <= 0.0 { w - delta } else { w })
        }
    }
}

/// Candidate narrow-set elements for the exhaustive or sampled checks.
enum Candidates {
    Exact(Vec<Matrix>),
    Sampled(Vec<Matrix>),
}

fn narrow_candidates(game: &GameInstance, n_samples: usize, seed: u64) -> Result<Candidates> {
    let base = game.narrow_base();
    match narrow_set_with_cap(&game.family, base, game.c1, game.c2, CHECK_ENUMERATION_CAP) {
        Ok(NarrowSet::Enumerated(list)) => Ok(Candidates::Exact(list)),
        Ok(NarrowSet::Parametric(p)) => Ok(Candidates::Sampled(p.sample(n_samples, seed)?)),
        Err(Error::TooLarge { .. }) => {
            let mut out = Vec::with_capacity(n_samples);
            for u in sample_concretization(&game.family, base, game.c1, n_samples, seed)? {
                out.push(perceive(&game.family, &u, game.c2)?);
            }
            Ok(Candidates::Sampled(out))
        }
        Err(e) => Err(e),
    }
}

/// Compares `P⁻(u1, c1, x, e_k)` with the infimum over the narrow set of `P⁺(u', c2, x, e_k)`
/// at sampled `x` and every column `k` of a zero-sum game.
///
/// Masked and limited-rank games use a closed-form narrow-set element per column; quantized
/// and table games minimize over the enumerated narrow set, or over samples plus the entrywise
/// smallest member when the set is too large.
pub fn check_narrowly_reversible(game: &GameInstance, n_x_samples: usize, seed: u64, tol: f64) -> Result<PropertyReport> {
    if !game.zero_sum() {
        return Err(invalid("narrow reversibility is defined for zero-sum games"));
    }
    let mut report = PropertyReport::new("narrowly-reversible");
    let (m, n) = game.shape();
    let row = game.row_model()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let simplex = Simplex::new(m)?;
    let xs: Vec<Vec<f64>> = (0..n_x_samples).map(|_| simplex.sample(&mut rng)).collect();

    if game.c1 >= game.c2 {
        let upper = BoundModel::new(&game.family, &game.perceived_row, game.c2)?;
        let mut widest: f64 = 0.0;
        for x in &xs {
            for k in 0..n {
                let e = unit(n, k);
                widest = widest.max(upper.upper(x, &e) - row.lower(x, &e));
            }
        }
        report.trials = xs.len() * n;
        report.notes.push(format!(
            "equal capabilities: the narrow set is the perceived matrix itself; the two sides differ by \
             at most {widest} and coincide only where the bounds do"
        ));
        return Ok(report);
    }

    let mut sampled = false;
    let candidates = match &game.family {
        PerceptionFamily::Masked | PerceptionFamily::LimitedRank(_) => None,
        _ => {
            let (list, exact) = match narrow_candidates(game, 200, seed)? {
                Candidates::Exact(list) => (list, true),
                Candidates::Sampled(mut list) => {
                    if let Some(floor) = lower_witness(game, &xs[0], 0)? {
                        list.push(floor);
                    }
                    (list, false)
                }
            };
            sampled = !exact;
            let mut models = Vec::with_capacity(list.len());
            for u in list {
                models.push((BoundModel::new(&game.family, &u, game.c2)?, u));
            }
            Some(models)
        }
    };

    let mut applicable = 0;
    let mut skipped = 0;
    for (i, x) in xs.iter().enumerate() {
        for k in 0..n {
            let e = unit(n, k);
            let lhs = row.lower(x, &e);
            let (rhs, witness) = match &candidates {
                Some(models) => models
                    .iter()
                    .map(|(model, u)| (model.upper(x, &e), u))
                    .fold((f64::INFINITY, &game.perceived_row), |a, b| if b.0 < a.0 { (b.0, b.1) } else { a }),
                None => match lower_witness(game, x, k)? {
                    Some(u) => {
                        let value = BoundModel::new(&game.family, &u, game.c2)?.upper(x, &e);
                        report.trials += 1;
                        applicable += 1;
                        record(&mut report, lhs, value, tol, &u, seed, i, k, x, &e);
                        continue;
                    }
                    None => {
                        skipped += 1;
                        continue;
                    }
                },
            };
            report.trials += 1;
            applicable += 1;
            let w = witness.clone();
            record(&mut report, lhs, rhs, tol, &w, seed, i, k, x, &e);
        }
    }
    if skipped > 0 {
        report.notes.push(format!(
            "{skipped} column evaluations skipped: more masked entries than the capability difference"
        ));
    }
    if applicable == 0 {
        report.verdict = Verdict::NotApplicable;
        return Ok(report);
    }
    report.settle();
    if sampled {
        report.notes.push(String::from("narrow set too large to enumerate; infimum estimated from samples"));
        if report.verdict.passed() {
            report.verdict = Verdict::HoldsUpToSampling;
        }
    }
    if report.verdict.passed() {
        report.guarantee = match &game.family {
            PerceptionFamily::LimitedRank(_) => Some("limited-rank games are narrowly reversible"),
            PerceptionFamily::Masked if skipped == 0 => Some("masked column-fill criterion"),
            _ => None,
        };
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn record(
    report: &mut PropertyReport,
    lhs: f64,
    rhs: f64,
    tol: f64,
    u: &Matrix,
    seed: u64,
    sample: usize,
    column: usize,
    x: &[f64],
    e: &[f64],
) {
    let gap = rhs - lhs;
    report.max_gap = report.max_gap.max(gap.abs());
    if gap.abs() > tol {
        report.fail(Witness {
            label: format!("x sample {sample}, column {column}"),
            seed,
            matrix: u.clone(),
            x: x.to_vec(),
            y: e.to_vec(),
            gap,
        });
    }
}

/// Maximin objective and estimates of the Stackelberg objective at one row strategy.
#[derive(Clone, Debug, PartialEq)]
pub struct StackelbergProbe {
    /// `min_k P⁻(u1, c1, x, e_k)`.
    pub h1: f64,
    /// `P⁻(u', c2, x, R(u', x))` at one closed-form narrow-set element.
    pub g_upper: f64,
    /// Smallest `P⁻(u', c2, x, R(u', x))` over every evaluated element.
    pub g_lower_est: f64,
    /// Number of narrow-set elements evaluated.
    pub evaluated: usize,
}

/// Evaluates the Stackelberg objective `g(x) = inf_{u'} P⁻(u', c2, x, R(u', x))` of a zero-sum
/// game over enumerated, sampled and closed-form narrow-set elements, where `R` is the
/// column player's best response minimizing `P⁺(u', c2, x, ·)`.
pub fn stackelberg_gap_probe(
    game: &GameInstance,
    x: &[f64],
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<StackelbergProbe> {
    if !game.zero_sum() {
        return Err(invalid("the Stackelberg probe is defined for zero-sum games"));
    }
    let (h1, _) = maximin_objective(game, x)?;
    let n = game.shape().1;
    let value = |u: &Matrix| -> Result<f64> {
        let y = game.respond(u, x, tol)?;
        Ok(BoundModel::new(&game.family, u, game.c2)?.lower(x, &y))
    };

    // closed-form element for the column that realizes h1
    let row = game.row_model()?;
    let lhs: Vec<f64> = (0..n).map(|k| row.lower(x, &unit(n, k))).collect();
    let active = lhs.iter().position(|v| v - h1 <= ACTIVE_TOL).unwrap_or(0);
    let mut order: Vec<usize> = (0..n).collect();
    order.swap(0, active);
    let mut analytic = Vec::new();
    if game.c1 >= game.c2 {
        order.truncate(1);
    }
    for k in order {
        if let Some(u) = lower_witness(game, x, k)? {
            analytic.push(u);
        }
    }

    let others = if game.c1 >= game.c2 {
        vec![]
    } else {
        match narrow_candidates(game, n_samples, seed)? {
            Candidates::Exact(list) | Candidates::Sampled(list) => list,
        }
    };
    let mut g_upper = None;
    let mut g_lower_est = f64::INFINITY;
    for u in &analytic {
        let v = value(u)?;
        g_upper.get_or_insert(v);
        g_lower_est = g_lower_est.min(v);
    }
    for u in &others {
        g_lower_est = g_lower_est.min(value(u)?);
    }
    let evaluated = analytic.len() + others.len();
    if evaluated == 0 {
        return Err(invalid("no narrow-set element to evaluate"));
    }
    Ok(StackelbergProbe { h1, g_upper: g_upper.unwrap_or(g_lower_est), g_lower_est, evaluated })
}
