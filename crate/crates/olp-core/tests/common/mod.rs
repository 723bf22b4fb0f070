//! Random instance generators shared by the integration suites.
#![allow(dead_code)]

use olp_core::numerics::{canonical_svd, Simplex};
use olp_core::perception::{perceive, PerceptionFamily};
use olp_core::{Capability, Matrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn fin(c: u32) -> Capability {
    Capability::Finite(c)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Matrix {
    Matrix::new(m, n, (0..m * n).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap()
}

/// Short decimals with a share of zeros and tied magnitudes.
pub fn decimal_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Matrix {
    let data = (0..m * n)
        .map(|_| match rng.gen_range(0..6) {
            0 => 0.0,
            1 => 1.5,
            2 => -1.5,
            _ => {
                let digits = rng.gen_range(0..=5);
                let scale = 10f64.powi(digits);
                let k: i64 = rng.gen_range(-3 * scale as i64..=3 * scale as i64);
                format!("{}", k as f64 / scale).parse().unwrap()
            }
        })
        .collect();
    Matrix::new(m, n, data).unwrap()
}

/// Random matrix whose singular values are pairwise separated by more than `1e-6`.
pub fn spread_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Matrix {
    loop {
        let a = random_matrix(rng, m, n);
        let s = canonical_svd(&a, 1e-12).sigma;
        if s.windows(2).all(|w| w[0] - w[1] > 1e-6) && s.last().is_some_and(|&x| x > 1e-3) {
            return a;
        }
    }
}

/// Random matrix of exact rank `r` with well-separated singular values.
pub fn rank_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize, r: usize) -> Matrix {
    let full = spread_matrix(rng, m, n);
    let f = canonical_svd(&full, 1e-12);
    f.truncate(r, 0.0).unwrap()
}

/// A random matrix as perceived by `family` at level `c`.
pub fn random_perceived(
    family: &PerceptionFamily,
    rng: &mut ChaCha8Rng,
    m: usize,
    n: usize,
    c: Capability,
) -> Matrix {
    let u = match family {
        PerceptionFamily::LimitedRank(_) => spread_matrix(rng, m, n),
        PerceptionFamily::Quantized => random_matrix(rng, m, n),
        _ => decimal_matrix(rng, m, n),
    };
    perceive(family, &u, c).unwrap()
}

/// Quantized perception with every entry nonzero at level `c`.
pub fn nonzero_quantized(rng: &mut ChaCha8Rng, m: usize, n: usize, c: u32) -> Matrix {
    let step = 10f64.powi(-(c as i32));
    let data = (0..m * n)
        .map(|_| {
            let k = rng.gen_range(1..=(2.0 / step) as i64);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            format!("{}", sign * k as f64 * step).parse::<f64>().unwrap()
        })
        .collect();
    let raw = Matrix::new(m, n, data).unwrap();
    perceive(&PerceptionFamily::Quantized, &raw, Capability::Finite(c)).unwrap()
}

pub fn random_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    Simplex::new(d).unwrap().sample(rng)
}

pub fn families() -> Vec<PerceptionFamily> {
    vec![PerceptionFamily::Masked, PerceptionFamily::Quantized, PerceptionFamily::limited_rank()]
}
