//! Two-player one-shot games in which each player sees only an abstraction of the true payoff
//! matrix, determined by a capability level.
//!
//! The crate covers four perception families (masked, quantized, limited-rank and finite
//! tables), closed-form bounds on the true expected payoff, a maximin solver for the
//! lower-capability player, property checks, and equilibrium verification, search,
//! compression and reduction on finite instances.
//!
//! Everything is pure computation over `alloc`; file formats and the command line live in a
//! separate crate.

#![no_std]

extern crate alloc;

pub mod bounds;
mod capability;
pub mod equilibrium;
mod error;
mod matrix;
pub mod numerics;
pub mod perception;
pub mod solver;

pub use capability::Capability;
pub use error::{Error, Result};
pub use matrix::{dot, norm, unit, Matrix, PayoffMatrix};
