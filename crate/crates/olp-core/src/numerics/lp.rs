//! Dense two-phase simplex method for small linear programs.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};

const PIVOT_TOL: f64 = 1e-10;
const MAX_PIVOTS: usize = 100_000;

/// `minimize cᵀz` subject to `A_ub z ≤ b_ub`, `A_eq z = b_eq` and `z ≥ 0`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub upper: Vec<(Vec<f64>, f64)>,
    pub equal: Vec<(Vec<f64>, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    /// A basic optimal solution.
    Optimal { z: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        LinearProgram { objective, upper: Vec::new(), equal: Vec::new() }
    }

    pub fn less_eq(&mut self, row: Vec<f64>, rhs: f64) {
        self.upper.push((row, rhs));
    }

    pub fn equals(&mut self, row: Vec<f64>, rhs: f64) {
        self.equal.push((row, rhs));
    }

    /// Bland's rule throughout, so the method terminates on degenerate programs.
    pub fn solve(&self) -> Result<LpOutcome> {
        let n = self.objective.len();
        let rows = self.upper.len() + self.equal.len();
        if self.upper.iter().chain(&self.equal).any(|(r, b)| r.len() != n || !b.is_finite()) {
            return Err(invalid("linear program rows do not match the variable count"));
        }
        if self.upper.iter().chain(&self.equal).flat_map(|(r, _)| r).any(|v| !v.is_finite()) {
            return Err(invalid("non-finite linear program coefficient"));
        }
        let slacks = self.upper.len();
        // every row gets an artificial unless its slack can start in the basis
        let needs_art: Vec<bool> = self
            .upper
            .iter()
            .map(|(_, b)| *b < 0.0)
            .chain(self.equal.iter().map(|_| true))
            .collect();
        let arts = needs_art.iter().filter(|&&a| a).count();
        let cols = n + slacks + arts;
        let mut t = vec![vec![0.0; cols + 1]; rows];
        let mut basis = vec![0usize; rows];
        let mut next_art = n + slacks;
        for (i, (row, b)) in self.upper.iter().chain(&self.equal).enumerate() {
            let sign = if *b < 0.0 { -1.0 } else { 1.0 };
            for j in 0..n {
                t[i][j] = sign * row[j];
            }
            if i < slacks {
                t[i][n + i] = sign;
            }
            t[i][cols] = sign * b;
            if needs_art[i] {
                t[i][next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            } else {
                basis[i] = n + i;
            }
        }
        let scale = t.iter().map(|r| r[cols].abs()).fold(1.0, f64::max);

        let mut phase_one = vec![0.0; cols];
        phase_one[n + slacks..].iter_mut().for_each(|c| *c = 1.0);
        let all = vec![true; cols];
        if !run(&mut t, &mut basis, &phase_one, &all)? {
            return Err(Error::ObjectiveError("phase one cannot be unbounded".into()));
        }
        let residual: f64 = basis.iter().zip(&t).filter(|(&b, _)| b >= n + slacks).map(|(_, r)| r[cols]).sum();
        if residual > 1e-9 * scale {
            return Ok(LpOutcome::Infeasible);
        }
        // drive zero-level artificials out of the basis, dropping redundant rows
        let mut i = 0;
        while i < t.len() {
            if basis[i] >= n + slacks {
                match (0..n + slacks).find(|&j| t[i][j].abs() > PIVOT_TOL) {
                    Some(j) => pivot(&mut t, &mut basis, i, j),
                    None => {
                        t.remove(i);
                        basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        let mut cost = vec![0.0; cols];
        cost[..n].copy_from_slice(&self.objective);
        let allowed: Vec<bool> = (0..cols).map(|j| j < n + slacks).collect();
        if !run(&mut t, &mut basis, &cost, &allowed)? {
            return Ok(LpOutcome::Unbounded);
        }
        let mut z = vec![0.0; n];
        for (r, &b) in basis.iter().enumerate() {
            if b < n {
                z[b] = t[r][cols].max(0.0);
            }
        }
        let value = self.objective.iter().zip(&z).map(|(c, v)| c * v).sum();
        Ok(LpOutcome::Optimal { z, value })
    }
}

/// Maximizes `x ↦ min_k (slopes[k]·x + offsets[k])` over the probability simplex with one
/// linear program. Returns the value recomputed at the (clipped) maximizer.
pub fn maximize_min_affine_lp(slopes: &[Vec<f64>], offsets: &[f64]) -> Result<(f64, Vec<f64>)> {
    let Some(first) = slopes.first() else {
        return Err(invalid("no affine pieces"));
    };
    let d = first.len();
    if d == 0 || slopes.iter().any(|s| s.len() != d) || offsets.len() != slopes.len() {
        return Err(invalid("inconsistent affine piece dimensions"));
    }
    // variables: x (d entries), then t = t⁺ − t⁻
    let mut objective = vec![0.0; d + 2];
    objective[d] = -1.0;
    objective[d + 1] = 1.0;
    let mut lp = LinearProgram::new(objective);
    let mut seen: Vec<(&[f64], f64)> = Vec::new();
    for (s, &b) in slopes.iter().zip(offsets) {
        if seen.iter().any(|(o, ob)| *o == s.as_slice() && *ob == b) {
            continue;
        }
        seen.push((s, b));
        let mut row: Vec<f64> = s.iter().map(|a| -a).collect();
        row.push(1.0);
        row.push(-1.0);
        lp.less_eq(row, b);
    }
    let mut simplex_row = vec![1.0; d];
    simplex_row.extend([0.0, 0.0]);
    lp.equals(simplex_row, 1.0);
    let LpOutcome::Optimal { z, .. } = lp.solve()? else {
        return Err(Error::ObjectiveError("piecewise maximization did not reach an optimum".into()));
    };
    let mut x = z[..d].to_vec();
    super::simplex::renormalize(&mut x);
    let value = slopes
        .iter()
        .zip(offsets)
        .map(|(s, b)| s.iter().zip(&x).map(|(a, v)| a * v).sum::<f64>() + b)
        .fold(f64::INFINITY, f64::min);
    Ok((value, x))
}

/// Pivots until no allowed column has a negative reduced cost; `false` when unbounded.
fn run(t: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], allowed: &[bool]) -> Result<bool> {
    let cols = cost.len();
    for _ in 0..MAX_PIVOTS {
        let entering = (0..cols).find(|&j| {
            if !allowed[j] || basis.contains(&j) {
                return false;
            }
            let reduced: f64 = cost[j] - basis.iter().zip(t.iter()).map(|(&b, r)| cost[b] * r[j]).sum::<f64>();
            reduced < -PIVOT_TOL
        });
        let Some(j) = entering else { return Ok(true) };
        let mut leave: Option<(usize, f64)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[j] > PIVOT_TOL {
                let ratio = row[cols] / row[j];
                let better = match leave {
                    None => true,
                    Some((k, best)) => ratio < best - 1e-12 || (ratio <= best + 1e-12 && basis[i] < basis[k]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((i, _)) = leave else { return Ok(false) };
        pivot(t, basis, i, j);
    }
    Err(Error::ObjectiveError("simplex pivot limit reached".into()))
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], i: usize, j: usize) {
    let p = t[i][j];
    t[i].iter_mut().for_each(|v| *v /= p);
    let row = t[i].clone();
    for (k, other) in t.iter_mut().enumerate() {
        if k != i && other[j] != 0.0 {
            let f = other[j];
            other.iter_mut().zip(&row).for_each(|(v, r)| *v -= f * r);
        }
    }
    basis[i] = j;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimal(lp: &LinearProgram) -> (Vec<f64>, f64) {
        match lp.solve().unwrap() {
            LpOutcome::Optimal { z, value } => (z, value),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn textbook_program() {
        // max 3a + 5b s.t. a ≤ 4, 2b ≤ 12, 3a + 2b ≤ 18
        let mut lp = LinearProgram::new(vec![-3.0, -5.0]);
        lp.less_eq(vec![1.0, 0.0], 4.0);
        lp.less_eq(vec![0.0, 2.0], 12.0);
        lp.less_eq(vec![3.0, 2.0], 18.0);
        let (z, v) = optimal(&lp);
        assert!((v + 36.0).abs() < 1e-12);
        assert!((z[0] - 2.0).abs() < 1e-12 && (z[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn equalities_and_negative_rhs() {
        // min a + b s.t. a + 2b = 4, −a ≤ −1
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.equals(vec![1.0, 2.0], 4.0);
        lp.less_eq(vec![-1.0, 0.0], -1.0);
        let (z, v) = optimal(&lp);
        assert!((v - 2.5).abs() < 1e-12, "{z:?}");
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.less_eq(vec![1.0], -1.0);
        assert_eq!(lp.solve().unwrap(), LpOutcome::Infeasible);
        let mut lp = LinearProgram::new(vec![-1.0, 0.0]);
        lp.less_eq(vec![0.0, 1.0], 1.0);
        assert_eq!(lp.solve().unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn matches_vertex_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let d = rng.gen_range(1..5);
            let k = rng.gen_range(1..7);
            let slopes: Vec<Vec<f64>> =
                (0..k).map(|_| (0..d).map(|_| rng.gen_range(-3i32..4) as f64 * 0.5).collect()).collect();
            let offsets: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let exact = super::super::maximize_min_affine(&slopes, &offsets, 1e-12).unwrap();
            let (v, x) = maximize_min_affine_lp(&slopes, &offsets).unwrap();
            assert!((v - exact.value).abs() < 1e-9, "{v} {} {x:?}", exact.value);
        }
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(vec![1.0, 2.0]);
        lp.equals(vec![1.0, 1.0], 1.0);
        lp.equals(vec![2.0, 2.0], 2.0);
        let (z, v) = optimal(&lp);
        assert_eq!(z, vec![1.0, 0.0]);
        assert_eq!(v, 1.0);
    }
}
