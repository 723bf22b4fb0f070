use core::fmt;

/// Capability level: a positive integer or infinity.
///
/// Ordering places every finite level below [`Capability::Infinite`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Capability {
    Finite(u32),
    Infinite,
}

impl Capability {
    /// A finite level; `None` for zero.
    pub fn finite(c: u32) -> Option<Self> {
        (c >= 1).then_some(Capability::Finite(c))
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Capability::Infinite)
    }

    /// The finite value, if any.
    pub fn value(self) -> Option<u32> {
        match self {
            Capability::Finite(c) => Some(c),
            Capability::Infinite => None,
        }
    }

    /// The finite value, or `cap` for infinity.
    pub fn clamp_to(self, cap: usize) -> usize {
        match self {
            Capability::Finite(c) => (c as usize).min(cap),
            Capability::Infinite => cap,
        }
    }

    /// The next level up; infinity stays put.
    pub fn succ(self) -> Self {
        match self {
            Capability::Finite(c) => Capability::Finite(c.saturating_add(1)),
            Capability::Infinite => Capability::Infinite,
        }
    }
}

impl From<u32> for Capability {
    fn from(c: u32) -> Self {
        Capability::Finite(c.max(1))
    }
}

impl fmt::Display for Capability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capability::Finite(c) => write!(f, "{c}"),
            Capability::Infinite => write!(f, "inf"),
        }
    }
}
