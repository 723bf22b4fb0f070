//! Payoff perception families.
//!
//! A family maps a true payoff matrix and a capability level to the matrix a player
//! perceives. The concretization of a perceived `v` at level `c` is the set of true matrices
//! that look like `v` at level `max(C(v), c)`, where `C` is the intrinsic capability.

pub mod low_rank;
pub mod masked;
pub mod quantized;
pub mod table;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::capability::Capability;
use crate::error::{invalid, Error, Result};
use crate::matrix::Matrix;

pub use low_rank::LowRank;
pub use masked::MaskShape;
pub use table::{
    validate_table_family, validate_table_oddness, TableElement, TableFamily, TableReport,
    TableViolation,
};

/// Default cardinality cap for enumerated narrow sets.
pub const NARROW_SET_CAP: usize = 1_000_000;

/// A perception family.
#[derive(Clone, Debug, PartialEq)]
pub enum PerceptionFamily {
    /// Keep the `c` largest-magnitude entries.
    Masked,
    /// Truncate every entry toward zero to `c` decimal digits.
    Quantized,
    /// Best rank-`c` approximation.
    LimitedRank(LowRank),
    /// Explicit finite table.
    Table(TableFamily),
}

impl PerceptionFamily {
    pub fn limited_rank() -> Self {
        PerceptionFamily::LimitedRank(LowRank::default())
    }

    pub fn name(&self) -> &'static str {
        match self {
            PerceptionFamily::Masked => "masked",
            PerceptionFamily::Quantized => "quantized",
            PerceptionFamily::LimitedRank(_) => "limited_rank",
            PerceptionFamily::Table(_) => "table",
        }
    }

    /// Whether `F(−u, c) = −F(u, c)`.
    pub fn is_odd(&self) -> bool {
        match self {
            PerceptionFamily::Table(t) => validate_table_oddness(t).is_valid(),
            _ => true,
        }
    }

    /// Whether perceived matrices compare with a tolerance rather than exactly.
    pub fn is_approximate(&self) -> bool {
        matches!(self, PerceptionFamily::LimitedRank(_))
    }

    /// Equality of two perceived matrices as this family understands it.
    pub fn same(&self, a: &Matrix, b: &Matrix) -> bool {
        if self.is_approximate() {
            a.frobenius_distance(b) <= low_rank::MATCH_TOL
        } else {
            a == b
        }
    }
}

fn check_matrix(u: &Matrix) -> Result<()> {
    if u.is_finite() {
        Ok(())
    } else {
        Err(invalid("payoff matrix has non-finite entries"))
    }
}

/// What a player of capability `c` perceives of `u`.
pub fn perceive(family: &PerceptionFamily, u: &Matrix, c: Capability) -> Result<Matrix> {
    check_matrix(u)?;
    match family {
        PerceptionFamily::Masked => Ok(masked::perceive(u, c)),
        PerceptionFamily::Quantized => Ok(quantized::perceive(u, c)),
        PerceptionFamily::LimitedRank(lr) => lr.perceive(u, c),
        PerceptionFamily::Table(t) => t.perceive(u, c),
    }
}

/// Smallest capability at which `u` is perceived exactly.
pub fn intrinsic_capability(family: &PerceptionFamily, u: &Matrix) -> Result<Capability> {
    check_matrix(u)?;
    match family {
        PerceptionFamily::Masked => Ok(masked::intrinsic_capability(u)),
        PerceptionFamily::Quantized => Ok(quantized::intrinsic_capability(u)),
        PerceptionFamily::LimitedRank(lr) => Ok(lr.intrinsic_capability(u)),
        PerceptionFamily::Table(t) => t.intrinsic_capability(u),
    }
}

/// The level `max(C(v), c)` at which the concretization of `v` is taken.
pub fn governing_level(family: &PerceptionFamily, v: &Matrix, c: Capability) -> Result<Capability> {
    Ok(intrinsic_capability(family, v)?.max(c))
}

/// Whether `u` belongs to the concretization of `v` at level `c`.
pub fn concretization_contains(
    family: &PerceptionFamily,
    v: &Matrix,
    c: Capability,
    u: &Matrix,
) -> Result<bool> {
    check_matrix(u)?;
    if u.shape() != v.shape() {
        return Ok(false);
    }
    let g = governing_level(family, v, c)?;
    if let PerceptionFamily::Table(t) = family {
        let Some(i) = t.index_of(u) else { return Ok(false) };
        return Ok(t.matrix(t.image(i, g)?) == v);
    }
    Ok(family.same(&perceive(family, u, g)?, v))
}

/// Verifies that `v` is its own perception at the governing level and returns that level.
pub fn check_perceived(family: &PerceptionFamily, v: &Matrix, c: Capability) -> Result<Capability> {
    let g = governing_level(family, v, c)?;
    if !family.same(&perceive(family, v, g)?, v) {
        return Err(Error::InvalidPerceived(format!(
            "matrix is not a fixed point of {} perception at level {g}",
            family.name()
        )));
    }
    Ok(g)
}

/// `n` seeded samples from the concretization of `v` at level `c`.
pub fn sample_concretization(
    family: &PerceptionFamily,
    v: &Matrix,
    c: Capability,
    n: usize,
    seed: u64,
) -> Result<Vec<Matrix>> {
    let g = check_perceived(family, v, c)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    match family {
        PerceptionFamily::Masked => {
            let Some(shape) = MaskShape::of(v, g) else { return Ok(vec![v.clone(); n]) };
            for _ in 0..n {
                let count = rng.gen_range(0..=shape.masked.len());
                let chosen = shape.choose(count, &mut rng);
                out.push(shape.fill(v, &chosen, &mut rng));
            }
        }
        PerceptionFamily::Quantized => {
            for _ in 0..n {
                out.push(v.map(|x| quantized::sample_entry(x, g, &mut rng)));
            }
        }
        PerceptionFamily::LimitedRank(lr) => {
            let r = lr.rank(v);
            if Capability::Finite(r as u32) != g {
                return Ok(vec![v.clone(); n]);
            }
            for _ in 0..n {
                out.push(lr.extend(v, usize::MAX, &mut rng));
            }
        }
        PerceptionFamily::Table(t) => {
            let target = t.require(v)?;
            let pre = t.preimage(target, g)?;
            for _ in 0..n {
                out.push(t.matrix(pre[rng.gen_range(0..pre.len())]).clone());
            }
        }
    }
    Ok(out)
}

/// Every member of the concretization of `v` at level `c`, for table families.
pub fn enumerate_concretization(table: &TableFamily, v: &Matrix, c: Capability) -> Result<Vec<usize>> {
    let target = table.require(v)?;
    let g = table.intrinsic_level(target).max(c);
    table.preimage(target, g)
}

/// True matrices that a player of capability `c2` can hold while perceiving the same thing
/// as a player of capability `c1` looking at `v`.
#[derive(Clone, Debug, PartialEq)]
pub enum NarrowSet {
    Enumerated(Vec<Matrix>),
    Parametric(ParametricNarrowSet),
}

impl NarrowSet {
    pub fn contains(&self, u: &Matrix) -> Result<bool> {
        match self {
            NarrowSet::Enumerated(list) => Ok(list.contains(u)),
            NarrowSet::Parametric(p) => p.contains(u),
        }
    }

    /// Seeded samples; enumerated sets cycle through their members when `n` exceeds the size.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<Matrix>> {
        match self {
            NarrowSet::Enumerated(list) => Ok((0..n).map(|i| list[i % list.len()].clone()).collect()),
            NarrowSet::Parametric(p) => p.sample(n, seed),
        }
    }

    pub fn len(&self) -> Option<usize> {
        match self {
            NarrowSet::Enumerated(list) => Some(list.len()),
            NarrowSet::Parametric(_) => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }
}

/// A narrow set described by a membership test and a sampler.
#[derive(Clone, Debug, PartialEq)]
pub struct ParametricNarrowSet {
    family: PerceptionFamily,
    /// `F(v, c1)`.
    base: Matrix,
    c1: Capability,
    c2: Capability,
}

impl ParametricNarrowSet {
    pub fn base(&self) -> &Matrix {
        &self.base
    }

    pub fn contains(&self, u: &Matrix) -> Result<bool> {
        if u.shape() != self.base.shape() {
            return Ok(false);
        }
        let low = intrinsic_capability(&self.family, u)? <= self.c2;
        Ok(low && self.family.same(&perceive(&self.family, u, self.c1)?, &self.base))
    }

    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<Matrix>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let extra = match (self.c1, self.c2) {
            (Capability::Finite(a), Capability::Finite(b)) => (b - a) as usize,
            _ => usize::MAX,
        };
        let mut out = Vec::with_capacity(n);
        match &self.family {
            PerceptionFamily::Masked => {
                let shape = MaskShape::of(&self.base, self.c1).expect("parametric masked set");
                let most = extra.min(shape.masked.len());
                for _ in 0..n {
                    let chosen = shape.choose(rng.gen_range(0..=most), &mut rng);
                    out.push(shape.fill(&self.base, &chosen, &mut rng));
                }
            }
            PerceptionFamily::LimitedRank(lr) => {
                for _ in 0..n {
                    out.push(lr.extend(&self.base, extra, &mut rng));
                }
            }
            PerceptionFamily::Quantized => {
                for _ in 0..n {
                    out.push(self.base.map(|x| quantized::sample_entry(x, self.c1, &mut rng)));
                }
            }
            PerceptionFamily::Table(_) => unreachable!("table narrow sets are enumerated"),
        }
        Ok(out)
    }
}

/// The narrow concretization set of `v` for capabilities `c1` and `c2`.
pub fn narrow_set(
    family: &PerceptionFamily,
    v: &Matrix,
    c1: Capability,
    c2: Capability,
) -> Result<NarrowSet> {
    narrow_set_with_cap(family, v, c1, c2, NARROW_SET_CAP)
}

/// [`narrow_set`] with an explicit enumeration cap.
pub fn narrow_set_with_cap(
    family: &PerceptionFamily,
    v: &Matrix,
    c1: Capability,
    c2: Capability,
    cap: usize,
) -> Result<NarrowSet> {
    if c1 >= c2 {
        return Ok(NarrowSet::Enumerated(vec![perceive(family, v, c2)?]));
    }
    let base = perceive(family, v, c1)?;
    let singleton = || Ok(NarrowSet::Enumerated(vec![base.clone()]));
    match family {
        PerceptionFamily::Table(t) => {
            let target = t.require(&base)?;
            let mut out = Vec::new();
            for i in 0..t.len() {
                if t.intrinsic_level(i) <= c2 && t.image(i, c1)? == target {
                    out.push(t.matrix(i).clone());
                }
            }
            Ok(NarrowSet::Enumerated(out))
        }
        PerceptionFamily::Quantized => match (c1, c2) {
            (Capability::Finite(a), Capability::Finite(b)) => {
                enumerate_quantized(&base, a, b, cap).map(NarrowSet::Enumerated)
            }
            _ => Ok(NarrowSet::Parametric(ParametricNarrowSet { family: family.clone(), base, c1, c2 })),
        },
        PerceptionFamily::Masked => {
            if MaskShape::of(&base, c1).is_none() {
                return singleton();
            }
            Ok(NarrowSet::Parametric(ParametricNarrowSet { family: family.clone(), base, c1, c2 }))
        }
        PerceptionFamily::LimitedRank(lr) => {
            let r = lr.rank(&base);
            let (m, n) = base.shape();
            if Capability::Finite(r as u32) != c1 || r >= m.min(n) {
                return singleton();
            }
            Ok(NarrowSet::Parametric(ParametricNarrowSet { family: family.clone(), base, c1, c2 }))
        }
    }
}

fn enumerate_quantized(base: &Matrix, c1: u32, c2: u32, cap: usize) -> Result<Vec<Matrix>> {
    let extra = (c2 - c1) as f64;
    let size: f64 = base
        .data()
        .iter()
        .map(|&w| {
            let k = libm::pow(10.0, extra);
            if w == 0.0 { 2.0 * k - 1.0 } else { k }
        })
        .product();
    if size > cap as f64 {
        return Err(Error::TooLarge { size, cap });
    }
    let options: Vec<Vec<f64>> =
        base.data().iter().map(|&w| quantized::preimage_values(w, c1, c2)).collect();
    let mut counter = vec![0usize; options.len()];
    let mut out = Vec::with_capacity(size as usize);
    let filter = c2 as usize > quantized::MAX_DIGITS;
    loop {
        let data = counter.iter().zip(&options).map(|(&k, o)| o[k]).collect();
        let u = Matrix::new(base.rows(), base.cols(), data)?;
        if !filter || quantized::intrinsic_capability(&u) <= Capability::Finite(c2) {
            out.push(u);
        }
        // last entry varies fastest
        let mut pos = options.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            counter[pos] += 1;
            if counter[pos] < options[pos].len() {
                break;
            }
            counter[pos] = 0;
        }
    }
}
