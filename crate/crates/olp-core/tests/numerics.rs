//! Oracle and property tests for the numerical kernels.

use olp_core::numerics::{
    canonical_svd, maximize_min_affine, null_space_bases, project_simplex, subgradient_maximize,
    zero_sum_value, Simplex, DEFAULT_RANK_TOL, DEFAULT_TIE_TOL,
};
use olp_core::{dot, Matrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Matrix {
    Matrix::new(m, n, (0..m * n).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap()
}

proptest! {
    #[test]
    fn projection_lands_on_simplex_and_is_nearest(v in prop::collection::vec(-5.0f64..5.0, 1..7), seed in 0u64..1000) {
        let p = project_simplex(&v).unwrap();
        let s = Simplex::new(v.len()).unwrap();
        prop_assert!(s.contains(&p, 1e-12));
        let dist = |a: &[f64]| a.iter().zip(&v).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let q = s.sample(&mut rng);
            prop_assert!(dist(&p) <= dist(&q) + 1e-12);
        }
        let again = project_simplex(&p).unwrap();
        prop_assert!(again.iter().zip(&p).all(|(a, b)| (a - b).abs() < 1e-12));
    }
}

#[test]
fn svd_reconstructs_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..500 {
        let (m, n) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let mut a = random_matrix(&mut rng, m, n);
        if rng.gen_bool(0.3) {
            // force rank deficiency by duplicating a row
            if m > 1 {
                for j in 0..n {
                    a[(m - 1, j)] = a[(0, j)];
                }
            }
        }
        let f = canonical_svd(&a, DEFAULT_TIE_TOL);
        let recon = f.truncate(f.sigma.len(), 0.0).unwrap();
        assert!(recon.frobenius_distance(&a) <= 1e-9 * (1.0 + a.frobenius_norm()));
        assert!(f.sigma.windows(2).all(|w| w[0] >= w[1]));
        let utu = f.u.transpose().matmul(&f.u).unwrap();
        let vtv = f.v.transpose().matmul(&f.v).unwrap();
        assert!(utu.frobenius_distance(&Matrix::identity(m)) <= 1e-9);
        assert!(vtv.frobenius_distance(&Matrix::identity(n)) <= 1e-9);
        // singular values squared sum to the squared Frobenius norm
        let s2: f64 = f.sigma.iter().map(|s| s * s).sum();
        assert!((s2 - a.frobenius_norm().powi(2)).abs() <= 1e-9 * (1.0 + s2));
        assert_eq!(f, canonical_svd(&a, DEFAULT_TIE_TOL));
    }
}

#[test]
fn svd_two_by_two_closed_form() {
    // Singular values from the eigenvalues of AᵀA: tr/2 ± sqrt(tr²/4 − det²).
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let a = random_matrix(&mut rng, 2, 2);
        let (p, q, r, s) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
        let tr = p * p + q * q + r * r + s * s;
        let det = p * s - q * r;
        let disc = (tr * tr / 4.0 - det * det).max(0.0).sqrt();
        let s1 = (tr / 2.0 + disc).sqrt();
        let s2 = (tr / 2.0 - disc).max(0.0).sqrt();
        let f = canonical_svd(&a, DEFAULT_TIE_TOL);
        assert!((f.sigma[0] - s1).abs() < 1e-9);
        assert!((f.sigma[1] - s2).abs() < 1e-7);
    }
}

#[test]
fn null_space_bases_annihilate() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let (m, n) = (rng.gen_range(2..=5), rng.gen_range(2..=5));
        let k = rng.gen_range(1..m.min(n));
        let mut a = Matrix::zeros(m, n);
        for _ in 0..k {
            let u: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            a.add_outer(1.0, &u, &v);
        }
        let (right, left) = null_space_bases(&a, DEFAULT_RANK_TOL);
        assert_eq!(right.cols(), n - k);
        assert_eq!(left.cols(), m - k);
        for j in 0..right.cols() {
            assert!(olp_core::norm(&a.mul_vec(&right.column(j))) < 1e-9);
        }
        for j in 0..left.cols() {
            assert!(olp_core::norm(&a.tmul_vec(&left.column(j))) < 1e-9);
        }
        let rtr = right.transpose().matmul(&right).unwrap();
        assert!(rtr.frobenius_distance(&Matrix::identity(n - k)) < 1e-9);
    }
}

/// Independent exact maximizer for dimension ≤ 3: scans every point where the active set of
/// the arrangement (pairwise equalities and simplex faces) pins a vertex.
fn arrangement_oracle(pieces: &[(Vec<f64>, f64)]) -> f64 {
    let d = pieces[0].0.len();
    let f = |x: &[f64]| pieces.iter().map(|(a, b)| dot(a, x) + b).fold(f64::INFINITY, f64::min);
    // hyperplanes h·x = c, restricted to the affine hull Σx = 1
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..d {
        let mut h = vec![0.0; d];
        h[i] = 1.0;
        planes.push((h, 0.0));
    }
    for i in 0..pieces.len() {
        for j in i + 1..pieces.len() {
            let h: Vec<f64> = pieces[i].0.iter().zip(&pieces[j].0).map(|(a, b)| a - b).collect();
            planes.push((h, pieces[j].1 - pieces[i].1));
        }
    }
    let mut best = f64::NEG_INFINITY;
    let mut consider = |x: Vec<f64>| {
        if x.iter().all(|v| *v >= -1e-12) {
            best = best.max(f(&x));
        }
    };
    match d {
        1 => consider(vec![1.0]),
        2 => {
            for (h, c) in &planes {
                // h0 t + h1 (1 − t) = c
                let den = h[0] - h[1];
                if den.abs() > 1e-14 {
                    let t = (c - h[1]) / den;
                    consider(vec![t, 1.0 - t]);
                }
            }
        }
        3 => {
            for a in 0..planes.len() {
                for b in a + 1..planes.len() {
                    let (h1, c1) = &planes[a];
                    let (h2, c2) = &planes[b];
                    // substitute x2 = 1 − x0 − x1
                    let r1 = [h1[0] - h1[2], h1[1] - h1[2], c1 - h1[2]];
                    let r2 = [h2[0] - h2[2], h2[1] - h2[2], c2 - h2[2]];
                    let det = r1[0] * r2[1] - r1[1] * r2[0];
                    if det.abs() > 1e-14 {
                        let x0 = (r1[2] * r2[1] - r1[1] * r2[2]) / det;
                        let x1 = (r1[0] * r2[2] - r1[2] * r2[0]) / det;
                        consider(vec![x0, x1, 1.0 - x0 - x1]);
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    best
}

fn random_pieces(rng: &mut ChaCha8Rng, d: usize) -> Vec<(Vec<f64>, f64)> {
    let k = rng.gen_range(1..=8);
    (0..k)
        .map(|_| ((0..d).map(|_| rng.gen_range(-1.0..1.0)).collect(), rng.gen_range(-0.5..0.5)))
        .collect()
}

#[test]
fn subgradient_reaches_piecewise_linear_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for trial in 0..50 {
        let d = rng.gen_range(2..=3);
        let pieces = random_pieces(&mut rng, d);
        let exact = arrangement_oracle(&pieces);
        let obj = |x: &[f64]| {
            let vals: Vec<f64> = pieces.iter().map(|(a, b)| dot(a, x) + b).collect();
            let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let k = vals.iter().position(|v| *v <= min + 1e-10).unwrap();
            (min, pieces[k].0.clone())
        };
        let r = subgradient_maximize(obj, d, 1e-6, 200_000, trial).unwrap();
        assert!((r.value - exact).abs() <= 1e-3, "trial {trial}: {} vs {exact}", r.value);
        assert!(r.value <= exact + 1e-12, "trial {trial}: {} above {exact}", r.value);
        assert_eq!(obj(&r.argmax).0, r.value);
    }
}

#[test]
fn piecewise_maximizer_agrees_with_arrangement_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..200 {
        let d = rng.gen_range(1..=3);
        let pieces = random_pieces(&mut rng, d);
        let exact = arrangement_oracle(&pieces);
        let slopes: Vec<Vec<f64>> = pieces.iter().map(|p| p.0.clone()).collect();
        let offsets: Vec<f64> = pieces.iter().map(|p| p.1).collect();
        let r = maximize_min_affine(&slopes, &offsets, 1e-12).unwrap();
        assert!((r.value - exact).abs() <= 1e-9, "{} vs {exact}", r.value);
    }
}

/// Closed-form value of a 2×2 zero-sum game: saddle point if one exists, otherwise the
/// equalizing mixed strategy.
fn two_by_two_value(a: &Matrix) -> f64 {
    let (p, q, r, s) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let maximin = p.min(q).max(r.min(s));
    let minimax = p.max(r).min(q.max(s));
    if (maximin - minimax).abs() < 1e-15 {
        return maximin;
    }
    (p * s - q * r) / (p + s - q - r)
}

#[test]
fn zero_sum_value_matches_two_by_two_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let tol = 1e-4;
    for _ in 0..100 {
        let a = random_matrix(&mut rng, 2, 2);
        let s = zero_sum_value(&a, tol).unwrap();
        let exact = two_by_two_value(&a);
        assert!((s.value - exact).abs() <= tol, "{} vs {exact}", s.value);
        assert!(s.lower <= exact + 1e-12 && exact <= s.upper + 1e-12);
    }
}

#[test]
fn zero_sum_value_brackets_larger_games() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..30 {
        let (m, n) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let a = random_matrix(&mut rng, m, n);
        let s = zero_sum_value(&a, 1e-4).unwrap();
        let cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
        let exact = maximize_min_affine(&cols, &vec![0.0; n], 1e-12).unwrap().value;
        assert!((s.value - exact).abs() <= 1e-4);
    }
}
