//! Exact verification of k-triangular lattice-valued set functions.
//!
//! Values live in concrete lattice groups (rational scalars or rational
//! vectors), set functions on power sets of at most 24 atoms, and every
//! infinitary statement is checked at an explicit, recorded horizon.

pub mod atoms;
pub mod corpus;
pub mod drewnowski;
pub mod error;
pub mod lattice;
pub mod limits;
pub mod setfun;

pub use atoms::AtomSet;
pub use error::{Error, Result};
pub use lattice::{
    Carrier, Certificate, Horizon, IndexMap, LatticeValue, OSequence, Rational, Regulator, Verdict, Witness,
};
