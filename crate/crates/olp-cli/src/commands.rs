//! Subcommand bodies. Each returns the command-specific part of the report.

use serde_json::{json, Map, Value};

use olp_core::bounds::{bounds_sampling_oracle, payoff_bounds, PayoffBounds};
use olp_core::equilibrium::{
    build_compact_repr, eval_compact_repr, reduce_general_to_zero_sum, search_nash_table, value_ordering,
    verify_nash, EquilibriumReport, ResponseFunction,
};
use olp_core::numerics::Simplex;
use olp_core::perception::{
    intrinsic_capability, perceive, validate_table_oddness, NarrowSet, PerceptionFamily,
};
use olp_core::solver::{
    check_axioms, check_constant_gap, check_narrowly_reversible, solve_maximin, solve_maximin_exact,
    stackelberg_gap_probe, PropertyReport, Witness,
};
use olp_core::{Capability, Error, Matrix};

use crate::game_file::{table_game_file, LoadedGame};
use crate::report::{cell, matrix, num, vector};
use crate::{CliError, Command, Property};

type Payload = Map<String, Value>;

/// Slack allowed between sampled payoffs and the closed-form bounds.
const ORACLE_SLACK: f64 = 1e-9;

pub fn run(command: &Command, g: &LoadedGame, seed: u64) -> Result<Payload, CliError> {
    match command {
        Command::Perceive { level, .. } => perceive_all(g, level),
        Command::Bounds { player, x, y, sweep, .. } => bounds(g, *player, x.as_deref(), y, *sweep),
        Command::Maximin { tol, max_iters, .. } => maximin(g, *tol, *max_iters, seed),
        Command::BestResponse { x, perception_id, .. } => best_response(g, x, perception_id.as_deref()),
        Command::Check { property, trials, tol, .. } => check(g, *property, *trials, seed, *tol),
        Command::Equilibrium { grid, eps, .. } => equilibrium(g, *grid, *eps),
        Command::CompactRepr { eps, eps_prime, grid, eval_perception, .. } => {
            compact(g, *eps, *eps_prime, *grid, eval_perception.as_deref())
        }
        Command::Oracle { samples, x, y, .. } => oracle(g, *samples, seed, x, y),
        Command::Reduce { .. } => unreachable!("reduce writes a side file"),
    }
}

fn object(v: Value) -> Payload {
    match v {
        Value::Object(map) => map,
        _ => unreachable!("payloads are objects"),
    }
}

fn parse_level(s: &str) -> Result<Capability, CliError> {
    if s == "inf" {
        return Ok(Capability::Infinite);
    }
    s.parse::<u32>()
        .ok()
        .and_then(Capability::finite)
        .ok_or_else(|| CliError::Input(format!("level must be a positive integer or inf, got {s:?}")))
}

fn parse_strategy(s: &str, len: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Input(format!("{what}: {e}")))?;
    if v.len() != len {
        return Err(CliError::Input(format!("{what} has {} entries, expected {len}", v.len())));
    }
    Simplex::new(len)?.check(&v, what)?;
    Ok(v)
}

fn capability_name(c: Capability) -> Value {
    Value::String(c.to_string())
}

/// A matrix as its table id when it has one, otherwise as its entries.
fn label(g: &LoadedGame, m: &Matrix) -> Value {
    g.table_id(m).map_or_else(|| matrix(m), Value::String)
}

/// The narrow-set member named on the command line.
fn member(g: &LoadedGame, id: Option<&str>) -> Result<Matrix, CliError> {
    let Some(id) = id else { return Ok(g.game.narrow_base().clone()) };
    if let PerceptionFamily::Table(t) = &g.game.family {
        let i = t.index_of_id(id).ok_or_else(|| CliError::Input(format!("unknown table id {id:?}")))?;
        return Ok(t.matrix(i).clone());
    }
    let k: usize = id.parse().map_err(|_| CliError::Input(format!("perception id {id:?} is not an index")))?;
    match g.game.narrow_set()? {
        NarrowSet::Enumerated(list) => list
            .get(k)
            .cloned()
            .ok_or_else(|| CliError::Input(format!("index {k} outside a narrow set of {}", list.len()))),
        NarrowSet::Parametric(_) => Err(CliError::Input("the narrow set is not enumerable".into())),
    }
}

fn perceive_all(g: &LoadedGame, level: &str) -> Result<Payload, CliError> {
    let c = parse_level(level)?;
    let named = [
        ("perceived_row", Some(&g.perceived_row)),
        ("perceived_col", g.perceived_col.as_ref()),
        ("true_row", g.true_row.as_ref()),
        ("true_col", g.true_col.as_ref()),
    ];
    let mut out = Vec::new();
    for (name, m) in named {
        let Some(m) = m else { continue };
        let p = perceive(&g.family, m, c)?;
        out.push(json!({
            "name": name,
            "input": matrix(m),
            "perceived": label(g, &p),
            "intrinsic_capability": capability_name(intrinsic_capability(&g.family, m)?),
        }));
    }
    Ok(object(json!({
        "family": g.family.name(),
        "level": capability_name(c),
        "matrices": out,
    })))
}

/// The matrix and level whose bounds describe `player`'s payoff, in file orientation.
fn player_view(g: &LoadedGame, player: u8) -> Result<(Matrix, Capability, &'static str), CliError> {
    if player == 1 {
        return Ok((g.perceived_row.clone(), g.c_row, "perceived_row"));
    }
    let truth = match (&g.true_col, &g.true_row) {
        (Some(c), _) => Some(c.clone()),
        (None, Some(r)) if g.perceived_col.is_none() => Some(-r),
        _ => None,
    };
    if let Some(t) = truth {
        return Ok((perceive(&g.family, &t, g.c_col)?, g.c_col, "own perception of the true column payoff"));
    }
    let v = g.perceived_col.clone().unwrap_or_else(|| -&g.perceived_row);
    Ok((v, g.c_row, "row player's view of the column payoff"))
}

fn bounds_json(b: PayoffBounds) -> Value {
    json!({ "lower": num(b.lower), "upper": num(b.upper) })
}

fn bounds(g: &LoadedGame, player: u8, x: Option<&str>, y: &str, sweep: Option<usize>) -> Result<Payload, CliError> {
    let (v, c, source) = player_view(g, player)?;
    let (m, n) = v.shape();
    let y = parse_strategy(y, n, "y")?;
    let head = json!({ "player": player, "matrix_source": source, "capability": capability_name(c), "y": vector(&y) });
    let mut out = object(head);
    match sweep {
        Some(resolution) => {
            if resolution == 0 {
                return Err(CliError::Input("sweep resolution must be positive".into()));
            }
            let mut rows = Vec::new();
            for (k, x) in Simplex::new(m)?.grid(resolution).into_iter().enumerate() {
                let b = payoff_bounds(&g.family, &v, c, &x, &y)?;
                rows.push(json!({ "point": k, "x": vector(&x), "lower": num(b.lower), "upper": num(b.upper) }));
            }
            out.insert("sweep".into(), Value::Array(rows));
        }
        None => {
            let Some(x) = x else { return Err(CliError::Input("bounds needs --x or --sweep".into())) };
            let x = parse_strategy(x, m, "x")?;
            let b = payoff_bounds(&g.family, &v, c, &x, &y)?;
            out.insert("x".into(), vector(&x));
            out.insert("lower".into(), num(b.lower));
            out.insert("upper".into(), num(b.upper));
        }
    }
    Ok(out)
}

/// Header and rows of a bounds sweep report, for CSV output.
pub fn sweep_table(report: &Value) -> Option<(Vec<String>, Vec<Vec<String>>)> {
    let rows = report.get("sweep")?.as_array()?;
    let m = rows.first()?.get("x")?.as_array()?.len();
    let mut header = vec!["point".to_string()];
    header.extend((1..=m).map(|i| format!("x{i}")));
    header.extend(["lower".to_string(), "upper".to_string()]);
    let body = rows
        .iter()
        .map(|r| {
            let mut line = vec![cell(&r["point"])];
            line.extend(r["x"].as_array().into_iter().flatten().map(cell));
            line.extend([cell(&r["lower"]), cell(&r["upper"])]);
            line
        })
        .collect();
    Some((header, body))
}

fn maximin(g: &LoadedGame, tol: f64, max_iters: usize, seed: u64) -> Result<Payload, CliError> {
    let game = &g.game;
    let sol = solve_maximin(game, tol, max_iters, seed)?;
    let exact = match solve_maximin_exact(game, 1e-12) {
        Ok((x, v)) => json!({ "x": vector(&x), "value": num(v) }),
        Err(Error::Unsupported(_)) => Value::Null,
        Err(e) => return Err(e.into()),
    };
    Ok(object(json!({
        "player": if game.swapped { 2 } else { 1 },
        "swapped": game.swapped,
        "x_star": vector(&sol.x),
        "value": num(sol.value),
        "convergence": {
            "iterations": sol.report.iterations,
            "certified_gap": num(sol.report.certified_gap),
        },
        "exact": exact,
    })))
}

fn best_response(g: &LoadedGame, x: &str, id: Option<&str>) -> Result<Payload, CliError> {
    let game = &g.game;
    let (m, _) = game.shape();
    let x = parse_strategy(x, m, "x")?;
    let w = member(g, id)?;
    let y = game.respond(&w, &x, 1e-12)?;
    let achieved = game.response_value(&w, &x, &y)?;
    Ok(object(json!({
        "swapped": game.swapped,
        "perception": label(g, &w),
        "x": vector(&x),
        "y": vector(&y),
        "objective": if game.zero_sum() { "minimize upper bound" } else { "maximize lower bound" },
        "achieved": num(achieved),
    })))
}

fn witness_json(w: &Witness) -> Value {
    json!({
        "label": w.label,
        "seed": w.seed,
        "matrix": matrix(&w.matrix),
        "x": vector(&w.x),
        "y": vector(&w.y),
        "gap": num(w.gap),
    })
}

fn property_json(r: &PropertyReport) -> Value {
    json!({
        "property": r.property,
        "verdict": r.verdict.name(),
        "trials": r.trials,
        "max_gap": num(r.max_gap),
        "witnesses": r.witnesses.iter().map(witness_json).collect::<Vec<_>>(),
        "exceptions": r.exceptions.iter().map(witness_json).collect::<Vec<_>>(),
        "guarantee": r.guarantee,
        "notes": r.notes,
    })
}

fn check(g: &LoadedGame, property: Property, trials: usize, seed: u64, tol: Option<f64>) -> Result<Payload, CliError> {
    let game = &g.game;
    let (report, passed) = match property {
        Property::Axioms => {
            let r = check_axioms(&game.family, game.shape(), trials, seed, game.zero_sum());
            (property_json(&r), r.verdict.passed())
        }
        Property::ConstantGap => {
            let r = check_constant_gap(&game.family, game.c1, trials, seed);
            (property_json(&r), r.verdict.passed())
        }
        Property::NarrowlyReversible => {
            let r = check_narrowly_reversible(game, trials, seed, tol.unwrap_or(1e-6))?;
            (property_json(&r), r.verdict.passed())
        }
        Property::StackelbergGap => {
            let tol = tol.unwrap_or(1e-4);
            let x = match solve_maximin_exact(game, 1e-12) {
                Ok((x, _)) => x,
                Err(Error::Unsupported(_)) => solve_maximin(game, 1e-9, 200_000, seed)?.x,
                Err(e) => return Err(e.into()),
            };
            let p = stackelberg_gap_probe(game, &x, trials, seed, tol)?;
            let gap = p.g_lower_est - p.h1;
            let holds = gap <= tol;
            let r = json!({
                "property": "stackelberg-gap",
                "verdict": if holds { "holds-up-to-sampling" } else { "fails" },
                "x_star": vector(&x),
                "h1": num(p.h1),
                "g_upper": num(p.g_upper),
                "g_lower_est": num(p.g_lower_est),
                "gap": num(gap),
                "tol": num(tol),
                "evaluated": p.evaluated,
            });
            (r, holds)
        }
    };
    let mut out = Payload::new();
    out.insert("report".into(), report);
    if passed {
        Ok(out)
    } else {
        Err(CliError::Failed(out))
    }
}

fn verification_json(r: &EquilibriumReport) -> Value {
    json!({
        "holds": r.holds,
        "eps": num(r.eps),
        "max_deviation_p1": num(r.max_deviation_p1),
        "max_deviation_p2": num(r.max_deviation_p2),
        "value": num(r.value),
        "best_value": num(r.best_value),
        "checked": r.checked,
        "exhaustive": r.exhaustive,
    })
}

fn responses_json(g: &LoadedGame, list: &[(Matrix, Vec<f64>)]) -> Value {
    Value::Array(list.iter().map(|(w, y)| json!({ "perception": label(g, w), "y": vector(y) })).collect())
}

fn not_found(grid: usize, eps: f64) -> CliError {
    CliError::Failed(object(json!({ "found": false, "grid": grid, "eps": num(eps) })))
}

fn equilibrium(g: &LoadedGame, grid: usize, eps: f64) -> Result<Payload, CliError> {
    let game = &g.game;
    let found = match search_nash_table(game, grid, eps) {
        Ok(f) => f,
        Err(Error::NotFound) => return Err(not_found(grid, eps)),
        Err(e) => return Err(e.into()),
    };
    let ResponseFunction::Enumerated(list) = &found.responses else { unreachable!("search enumerates") };
    let mut out = object(json!({
        "found": true,
        "swapped": game.swapped,
        "x_star": vector(&found.x),
        "responses": responses_json(g, list),
        "verification": verification_json(&found.report),
        "tried": found.tried,
    }));
    if game.zero_sum() {
        let o = value_ordering(game, &found.x, &found.responses, grid)?;
        out.insert(
            "value_ordering".into(),
            json!({
                "maximin": num(o.maximin),
                "nash": num(o.nash),
                "stackelberg": num(o.stackelberg),
                "stackelberg_x": vector(&o.stackelberg_x),
                "holds": o.holds(1e-9),
            }),
        );
    }
    Ok(out)
}

fn compact(
    g: &LoadedGame,
    eps: f64,
    eps_prime: Option<f64>,
    grid: usize,
    eval_at: Option<&str>,
) -> Result<Payload, CliError> {
    let game = &g.game;
    let found = match search_nash_table(game, grid, eps) {
        Ok(f) => f,
        Err(Error::NotFound) => return Err(not_found(grid, eps)),
        Err(e) => return Err(e.into()),
    };
    let mut repr = build_compact_repr(game, &found.x, &found.responses, eps)?;
    if let Some(e) = eps_prime {
        if !(e >= 0.0) {
            return Err(CliError::Input("eps-prime must be non-negative".into()));
        }
        repr.eps_prime = e;
    }
    let size = game.narrow_set()?.len();
    let mut out = object(json!({
        "x_star": vector(&repr.x_star),
        "f_star": num(repr.f_star),
        "eps": num(repr.eps),
        "eps_prime": num(repr.eps_prime),
        "anchor_count": repr.anchors.len(),
        "row_actions": game.shape().0,
        "narrow_set_size": size,
        "anchors": responses_json(g, &repr.anchors),
    }));
    if let Some(id) = eval_at {
        let w = member(g, Some(id))?;
        let anchored = repr.anchors.iter().any(|(a, _)| game.family.same(a, &w));
        let evaluation = match eval_compact_repr(game, &repr, &w) {
            Ok(y) => json!({ "perception": label(g, &w), "anchor": anchored, "y": vector(&y) }),
            Err(Error::OracleFailure { slack }) => {
                out.insert("evaluation".into(), json!({ "perception": label(g, &w), "oracle_slack": num(slack) }));
                return Err(CliError::Failed(out));
            }
            Err(e) => return Err(e.into()),
        };
        out.insert("evaluation".into(), evaluation);
    }
    let total = repr.eps + repr.eps_prime;
    let ry = ResponseFunction::Compact(repr);
    match verify_nash(game, &found.x, &ry, total, usize::MAX, 0) {
        Ok(r) => {
            let holds = r.holds;
            out.insert("verification".into(), verification_json(&r));
            if holds {
                Ok(out)
            } else {
                Err(CliError::Failed(out))
            }
        }
        Err(Error::OracleFailure { slack }) => {
            out.insert("verification".into(), json!({ "holds": false, "oracle_slack": num(slack) }));
            Err(CliError::Failed(out))
        }
        Err(e) => Err(e.into()),
    }
}

/// The reduction report and the text of the reduced game file.
pub fn reduce(g: &LoadedGame) -> Result<(Payload, String), CliError> {
    let (reduced, mapping) = reduce_general_to_zero_sum(&g.game)?;
    let PerceptionFamily::Table(table) = &reduced.family else { unreachable!("the reduction builds a table") };
    let file = table_game_file(table, &reduced.perceived_row, reduced.c1, reduced.c2);
    let mut text = serde_json::to_string_pretty(&file).expect("game files serialize");
    text.push('\n');
    let lifted: Vec<Value> = mapping
        .lifted
        .iter()
        .map(|(v, w)| {
            let reduced_id = table.index_of(w).map(|i| table.id(i).to_string());
            json!({ "original": label(g, v), "reduced": reduced_id })
        })
        .collect();
    let payload = object(json!({
        "swapped": g.game.swapped,
        "rows": mapping.rows,
        "k_p": num(mapping.k_p),
        "b_p": num(mapping.b_p),
        "k_n": num(mapping.k_n),
        "b_n": num(mapping.b_n),
        "lifted": lifted,
        "reduced_elements": table.len(),
        "reduced_odd": validate_table_oddness(table).is_valid(),
        "reduced_digest": crate::report::digest([text.as_bytes()]),
    }));
    Ok((payload, text))
}

fn oracle(g: &LoadedGame, samples: usize, seed: u64, x: &str, y: &str) -> Result<Payload, CliError> {
    let v = &g.perceived_row;
    let (m, n) = v.shape();
    let x = parse_strategy(x, m, "x")?;
    let y = parse_strategy(y, n, "y")?;
    let closed = payoff_bounds(&g.family, v, g.c_row, &x, &y)?;
    let sampled = bounds_sampling_oracle(&g.family, v, g.c_row, &x, &y, samples, seed)?;
    let inside = sampled.lower >= closed.lower - ORACLE_SLACK && sampled.upper <= closed.upper + ORACLE_SLACK;
    let out = object(json!({
        "x": vector(&x),
        "y": vector(&y),
        "samples": samples,
        "closed_form": bounds_json(closed),
        "sampled": bounds_json(sampled),
        "lower_gap": num(sampled.lower - closed.lower),
        "upper_gap": num(closed.upper - sampled.upper),
        "inside": inside,
    }));
    if inside {
        Ok(out)
    } else {
        Err(CliError::Failed(out))
    }
}
