//! Lattice-group values, (O)-sequences, regulators and (D)-convergence.

pub mod convergence;
pub mod fremlin;
pub mod phi;
pub mod regulator;
pub mod value;

pub use convergence::{
    d_converges, subsequence_principle_check, weak_distributivity_estimate, Certificate, Horizon, SubsequenceSelector,
    Verdict, Witness,
};
pub use fremlin::{fremlin_check, fremlin_combine, FremlinReport};
pub use phi::PhiSampler;
pub use regulator::{
    o_sequence_from_regulator, regulator_from_o_sequence, regulator_sup, IndexMap, OLevel, OSequence, Regulator,
};
pub use value::{approx, format_rational, int, parse_rational, rat, Carrier, LatticeValue, Rational};
