use alloc::string::String;
use core::fmt;

/// Failure modes shared by every module of the crate.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Malformed arguments: wrong dimensions, non-finite data, points off the simplex.
    InvalidInput(String),
    /// An objective handed to an optimizer produced a non-finite value.
    ObjectiveError(String),
    /// The singular values around a truncation cut are too close to pick a unique truncation.
    DegenerateTie { index: usize, gap: f64 },
    /// A table family was asked about a matrix outside its universe.
    UnknownMatrix,
    /// A matrix claimed to be a perception is not a fixed point at the stated level.
    InvalidPerceived(String),
    /// An enumeration would exceed its cardinality cap.
    TooLarge { size: f64, cap: usize },
    /// The perturbation magnitude does not stay below the smallest retained singular value.
    InvalidPerturbation { q: f64, sigma: f64 },
    /// A strategy has no component in the relevant null space.
    DegenerateDirection,
    /// A response function does not match the narrow set it is checked against.
    InvalidResponseFunction(String),
    /// No candidate passed the acceptance test.
    NotFound,
    /// The compact-representation oracle found no feasible response.
    OracleFailure { slack: f64 },
    /// A reduced equilibrium puts mass on the padding rows.
    ReductionViolation { tail_mass: f64 },
    /// The operation is not available for this perception family or game shape.
    Unsupported(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::ObjectiveError(msg) => write!(f, "objective error: {msg}"),
            Error::DegenerateTie { index, gap } => write!(
                f,
                "degenerate singular-value tie at cut {index} (gap {gap:e})"
            ),
            Error::UnknownMatrix => write!(f, "matrix is not in the table universe"),
            Error::InvalidPerceived(msg) => write!(f, "invalid perceived matrix: {msg}"),
            Error::TooLarge { size, cap } => {
                write!(f, "enumeration of {size} elements exceeds cap {cap}")
            }
            Error::InvalidPerturbation { q, sigma } => {
                write!(f, "perturbation |{q}| must be below sigma {sigma}")
            }
            Error::DegenerateDirection => {
                write!(f, "strategy has no null-space component; payoff cannot be moved")
            }
            Error::InvalidResponseFunction(msg) => write!(f, "invalid response function: {msg}"),
            Error::NotFound => write!(f, "no candidate passed"),
            Error::OracleFailure { slack } => {
                write!(f, "response oracle infeasible (best slack {slack:e})")
            }
            Error::ReductionViolation { tail_mass } => {
                write!(f, "reduced equilibrium has tail mass {tail_mass:e}")
            }
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
