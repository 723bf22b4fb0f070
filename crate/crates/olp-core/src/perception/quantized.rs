//! Decimal truncation toward zero.
//!
//! Entries are read through their shortest round-trip decimal expansion, so `0.29` is treated
//! as the decimal 0.29 rather than the binary value just below it.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::capability::Capability;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Digit count above which a decimal is treated as not finitely representable.
pub const MAX_DIGITS: usize = 15;

struct Decimal {
    negative: bool,
    int: String,
    frac: String,
}

fn decompose(x: f64) -> Decimal {
    let s = format!("{}", x.abs());
    let (int, frac) = match s.split_once('.') {
        Some((i, f)) => (String::from(i), String::from(f)),
        None => (s, String::new()),
    };
    Decimal { negative: x.is_sign_negative(), int, frac }
}

fn compose(negative: bool, int: &str, frac: &str) -> f64 {
    let text = if frac.is_empty() { String::from(int) } else { format!("{int}.{frac}") };
    let mag: f64 = text.parse().expect("decimal digits parse");
    if mag == 0.0 {
        0.0
    } else if negative {
        -mag
    } else {
        mag
    }
}

/// `sign(x) · 10^-digits · floor(10^digits · |x|)` on the decimal expansion of `x`.
pub fn truncate(x: f64, digits: u32) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let d = decompose(x);
    let keep = (digits as usize).min(d.frac.len());
    compose(d.negative, &d.int, &d.frac[..keep])
}

/// Number of fractional decimal digits of `x`.
pub fn fractional_digits(x: f64) -> usize {
    if x == 0.0 {
        return 0;
    }
    decompose(x).frac.len()
}

pub fn perceive(u: &Matrix, c: Capability) -> Matrix {
    match c {
        Capability::Infinite => u.map(|v| if v == 0.0 { 0.0 } else { v }),
        Capability::Finite(d) => u.map(|v| truncate(v, d)),
    }
}

pub fn intrinsic_capability(u: &Matrix) -> Capability {
    let digits = u.data().iter().map(|&v| fractional_digits(v)).max().unwrap_or(0);
    if digits > MAX_DIGITS {
        Capability::Infinite
    } else {
        Capability::Finite(digits.max(1) as u32)
    }
}

/// `10^-c`, the width of a truncation cell at level `c` (zero at infinity).
pub fn cell_width(c: Capability) -> f64 {
    match c {
        Capability::Finite(d) => libm::pow(10.0, -(d as f64)),
        Capability::Infinite => 0.0,
    }
}

/// Lower and upper endpoint matrices of the truncation preimage of `v` at level `g`.
pub fn endpoint_matrices(v: &Matrix, g: Capability) -> (Matrix, Matrix) {
    let delta = cell_width(g);
    let lower = v.map(|x| if x <= 0.0 { x - delta } else { x });
    let upper = v.map(|x| if x >= 0.0 { x + delta } else { x });
    (lower, upper)
}

/// Uniform sample from the truncation preimage of each entry, open ends shrunk by `1 − 1e-9`.
pub fn sample_entry<R: Rng + ?Sized>(x: f64, g: Capability, rng: &mut R) -> f64 {
    let delta = cell_width(g);
    if delta == 0.0 {
        return x;
    }
    let r: f64 = rng.gen();
    let shrink = 1.0 - 1e-9;
    if x > 0.0 {
        x + delta * r * shrink
    } else if x < 0.0 {
        x - delta * r * shrink
    } else {
        delta * (2.0 * r - 1.0) * shrink
    }
}

/// All decimals with at most `c2` fractional digits that truncate to `w` at level `c1`.
///
/// `w` must have at most `c1` fractional digits.
pub fn preimage_values(w: f64, c1: u32, c2: u32) -> Vec<f64> {
    let extra = (c2 - c1) as usize;
    let count = 10usize.pow(extra as u32);
    let d = decompose(w);
    let mut base_frac = d.frac.clone();
    while base_frac.len() < c1 as usize {
        base_frac.push('0');
    }
    let mut out = Vec::with_capacity(if w == 0.0 { 2 * count - 1 } else { count });
    let tail = |k: usize| format!("{k:0extra$}");
    if w == 0.0 {
        for k in 0..count {
            out.push(compose(false, &d.int, &format!("{base_frac}{}", tail(k))));
        }
        for k in 1..count {
            out.push(compose(true, &d.int, &format!("{base_frac}{}", tail(k))));
        }
    } else {
        for k in 0..count {
            out.push(compose(d.negative, &d.int, &format!("{base_frac}{}", tail(k))));
        }
    }
    out
}

/// Smallest decimal with at most `c2` fractional digits that truncates to `w` at level `c1`.
pub fn preimage_floor(w: f64, c1: u32, c2: u32) -> f64 {
    if w > 0.0 || c2 <= c1 {
        return w;
    }
    let d = decompose(w);
    let mut frac = d.frac.clone();
    while frac.len() < c1 as usize {
        frac.push('0');
    }
    (c1..c2).for_each(|_| frac.push('9'));
    compose(true, &d.int, &frac)
}

/// Errors unless `v` has at most `g` digits in every entry.
pub fn check_fixed_point(v: &Matrix, g: Capability) -> Result<()> {
    if perceive(v, g) != *v {
        return Err(Error::InvalidPerceived(format!("not a fixed point of truncation at level {g}")));
    }
    Ok(())
}
