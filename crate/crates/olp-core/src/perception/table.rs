//! Perception given by an explicit finite table.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::capability::Capability;
use crate::error::{invalid, Error, Result};
use crate::matrix::Matrix;

/// One element of a table universe.
#[derive(Clone, Debug, PartialEq)]
pub struct TableElement {
    pub id: String,
    pub matrix: Matrix,
}

impl TableElement {
    pub fn new(id: impl Into<String>, matrix: Matrix) -> Self {
        TableElement { id: id.into(), matrix }
    }
}

/// A finite universe of matrices with a level-indexed perception map.
///
/// Levels above `level_cap` behave like `level_cap`; infinite capability is the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct TableFamily {
    elements: Vec<TableElement>,
    level_cap: u32,
    /// `map[element][level − 1]`.
    map: Vec<Vec<Option<usize>>>,
}

impl TableFamily {
    /// A table with an empty map.
    pub fn new(elements: Vec<TableElement>, level_cap: u32) -> Result<Self> {
        if level_cap == 0 {
            return Err(invalid("table level cap must be at least 1"));
        }
        let Some(first) = elements.first() else {
            return Err(invalid("table universe is empty"));
        };
        let shape = first.matrix.shape();
        for (i, e) in elements.iter().enumerate() {
            if e.matrix.shape() != shape {
                return Err(invalid(format!("table element {} has a different shape", e.id)));
            }
            if !e.matrix.is_finite() {
                return Err(invalid(format!("table element {} is not finite", e.id)));
            }
            if elements[..i].iter().any(|o| o.id == e.id) {
                return Err(invalid(format!("duplicate table id {}", e.id)));
            }
        }
        let map = vec![vec![None; level_cap as usize]; elements.len()];
        Ok(TableFamily { elements, level_cap, map })
    }

    /// A table whose map is the identity at every level.
    pub fn identity(elements: Vec<TableElement>, level_cap: u32) -> Result<Self> {
        let mut t = TableFamily::new(elements, level_cap)?;
        for (i, row) in t.map.iter_mut().enumerate() {
            row.iter_mut().for_each(|e| *e = Some(i));
        }
        Ok(t)
    }

    /// A table built from `(from_id, level, to_id)` entries.
    pub fn from_entries<S: AsRef<str>>(
        elements: Vec<TableElement>,
        level_cap: u32,
        entries: &[(S, u32, S)],
    ) -> Result<Self> {
        let mut t = TableFamily::new(elements, level_cap)?;
        for (from, level, to) in entries {
            t.set(from.as_ref(), *level, to.as_ref())?;
        }
        Ok(t)
    }

    /// Records `F(from, level) = to`; re-recording the same target is allowed.
    pub fn set(&mut self, from: &str, level: u32, to: &str) -> Result<()> {
        let f = self.require_id(from)?;
        let t = self.require_id(to)?;
        self.set_index(f, level, t)
    }

    pub fn set_index(&mut self, from: usize, level: u32, to: usize) -> Result<()> {
        if level == 0 || level > self.level_cap {
            return Err(invalid(format!("table level {level} outside [1, {}]", self.level_cap)));
        }
        let slot = &mut self.map[from][level as usize - 1];
        match *slot {
            Some(existing) if existing != to => Err(invalid(format!(
                "conflicting table entries for ({}, {level})",
                self.elements[from].id
            ))),
            _ => {
                *slot = Some(to);
                Ok(())
            }
        }
    }

    fn require_id(&self, id: &str) -> Result<usize> {
        self.index_of_id(id).ok_or_else(|| invalid(format!("unknown table id {id}")))
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn level_cap(&self) -> u32 {
        self.level_cap
    }

    pub fn shape(&self) -> (usize, usize) {
        self.elements[0].matrix.shape()
    }

    pub fn elements(&self) -> &[TableElement] {
        &self.elements
    }

    pub fn id(&self, index: usize) -> &str {
        &self.elements[index].id
    }

    pub fn matrix(&self, index: usize) -> &Matrix {
        &self.elements[index].matrix
    }

    pub fn index_of_id(&self, id: &str) -> Option<usize> {
        self.elements.iter().position(|e| e.id == id)
    }

    /// Index of the first element equal to `u`.
    pub fn index_of(&self, u: &Matrix) -> Option<usize> {
        self.elements.iter().position(|e| e.matrix == *u)
    }

    pub fn require(&self, u: &Matrix) -> Result<usize> {
        self.index_of(u).ok_or(Error::UnknownMatrix)
    }

    /// All recorded `(from_id, level, to_id)` entries in element-then-level order.
    pub fn entries(&self) -> Vec<(String, u32, String)> {
        let mut out = Vec::new();
        for (i, row) in self.map.iter().enumerate() {
            for (l, to) in row.iter().enumerate() {
                if let Some(t) = to {
                    out.push((self.elements[i].id.clone(), l as u32 + 1, self.elements[*t].id.clone()));
                }
            }
        }
        out
    }

    /// Index of `F(element, c)`.
    pub fn image(&self, index: usize, c: Capability) -> Result<usize> {
        let level = match c {
            Capability::Infinite => return Ok(index),
            Capability::Finite(c) => c.min(self.level_cap),
        };
        self.lookup(index, level).ok_or_else(|| {
            invalid(format!("table has no entry for ({}, {level})", self.elements[index].id))
        })
    }

    fn lookup(&self, index: usize, level: u32) -> Option<usize> {
        self.map[index][level as usize - 1]
    }

    pub fn perceive(&self, u: &Matrix, c: Capability) -> Result<Matrix> {
        let i = self.require(u)?;
        Ok(self.matrix(self.image(i, c)?).clone())
    }

    /// Smallest level that fixes the element, infinity when none up to the cap does.
    pub fn intrinsic_level(&self, index: usize) -> Capability {
        (1..=self.level_cap)
            .find(|&l| self.lookup(index, l) == Some(index))
            .map_or(Capability::Infinite, Capability::Finite)
    }

    pub fn intrinsic_capability(&self, u: &Matrix) -> Result<Capability> {
        Ok(self.intrinsic_level(self.require(u)?))
    }

    /// Elements whose image at level `c` is `target`.
    pub fn preimage(&self, target: usize, c: Capability) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            if self.image(i, c)? == target {
                out.push(i);
            }
        }
        Ok(out)
    }

    /// Index of the element equal to the negation of `index`, if present.
    pub fn negation_of(&self, index: usize) -> Option<usize> {
        self.index_of(&-self.matrix(index))
    }

    /// The same table with every matrix transposed.
    pub fn transposed(&self) -> TableFamily {
        let mut t = self.clone();
        for e in &mut t.elements {
            e.matrix = e.matrix.transpose();
        }
        t
    }

    /// Adds a `neg:<id>` element for every element whose negation is missing and extends the
    /// map by `F(−u, c) = −F(u, c)`.
    pub fn with_negations(&self) -> Result<TableFamily> {
        let mut elements = self.elements.clone();
        for e in &self.elements {
            let neg = -&e.matrix;
            if !elements.iter().any(|o| o.matrix == neg) {
                elements.push(TableElement::new(format!("neg:{}", e.id), neg));
            }
        }
        let mut t = TableFamily::new(elements, self.level_cap)?;
        for i in 0..self.len() {
            let ni = t.negation_of(i).expect("negation was added");
            for l in 1..=self.level_cap {
                if let Some(j) = self.lookup(i, l) {
                    t.set_index(i, l, j)?;
                    let nj = t.negation_of(j).expect("negation was added");
                    if ni >= self.len() {
                        t.set_index(ni, l, nj)?;
                    }
                }
            }
        }
        Ok(t)
    }
}

/// A single failed table check.
#[derive(Clone, Debug, PartialEq)]
pub enum TableViolation {
    /// No entry for `(id, level)`.
    Missing { id: String, level: u32 },
    /// `F(F(id, first), second)` is `got` but `F(id, min(first, second))` is `expected`.
    PathIndependence { id: String, first: u32, second: u32, got: String, expected: String },
    /// An element with intrinsic level at most the cap is moved at the cap.
    NotFixedAtCap { id: String },
    /// Two ids name the same matrix.
    DuplicateMatrix { first: String, second: String },
    /// The negation of `id` is not in the universe.
    MissingNegation { id: String },
    /// `F(−id, level) ≠ −F(id, level)`.
    NotOdd { id: String, level: u32 },
}

/// Outcome of a table validation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TableReport {
    pub violations: Vec<TableViolation>,
}

impl TableReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks totality, path independence on `[1, cap]²`, fixed points at the cap and distinct
/// matrices.
pub fn validate_table_family(table: &TableFamily) -> TableReport {
    let mut violations = Vec::new();
    let cap = table.level_cap;
    for i in 0..table.len() {
        for j in 0..i {
            if table.matrix(i) == table.matrix(j) {
                violations.push(TableViolation::DuplicateMatrix {
                    first: table.id(j).into(),
                    second: table.id(i).into(),
                });
            }
        }
    }
    for i in 0..table.len() {
        for l in 1..=cap {
            if table.lookup(i, l).is_none() {
                violations.push(TableViolation::Missing { id: table.id(i).into(), level: l });
            }
        }
    }
    for i in 0..table.len() {
        for c1 in 1..=cap {
            for c2 in 1..=cap {
                let Some(mid) = table.lookup(i, c1) else { continue };
                let (Some(got), Some(expected)) = (table.lookup(mid, c2), table.lookup(i, c1.min(c2)))
                else {
                    continue;
                };
                if got != expected {
                    violations.push(TableViolation::PathIndependence {
                        id: table.id(i).into(),
                        first: c1,
                        second: c2,
                        got: table.id(got).into(),
                        expected: table.id(expected).into(),
                    });
                }
            }
        }
        let fixed_somewhere = (1..=cap).any(|l| table.lookup(i, l) == Some(i));
        if fixed_somewhere && table.lookup(i, cap).is_some_and(|t| t != i) {
            violations.push(TableViolation::NotFixedAtCap { id: table.id(i).into() });
        }
    }
    TableReport { violations }
}

/// Checks that the universe is closed under negation and the map commutes with it.
pub fn validate_table_oddness(table: &TableFamily) -> TableReport {
    let mut violations = Vec::new();
    for i in 0..table.len() {
        let Some(ni) = table.negation_of(i) else {
            violations.push(TableViolation::MissingNegation { id: table.id(i).into() });
            continue;
        };
        for l in 1..=table.level_cap {
            let (Some(a), Some(b)) = (table.lookup(i, l), table.lookup(ni, l)) else { continue };
            if table.negation_of(a) != Some(b) {
                violations.push(TableViolation::NotOdd { id: table.id(i).into(), level: l });
            }
        }
    }
    TableReport { violations }
}
