//! Sequences of set functions: (s)-boundedness, continuity from above at `∅`,
//! τ-continuity, inheritance by the semivariation, and the convergence-theorem harness.

pub mod family;
pub mod harness;
pub mod profiles;

pub use family::{tail_chain, tail_unions, validate_chain, validate_disjoint, Scope, SetFunctionFamily, Submeasure};
pub use harness::{
    schur_gap, theorem_harness, GapRow, HarnessConfig, HarnessInputs, HarnessReport, HarnessVerdict, Theorem,
};
pub use profiles::{
    continuity_factor_check, continuity_profile, s_bounded_profile, semivariation_inheritance_check,
    tau_continuity_check, tight_regulator, uniformity_transfer_check, DecayProfile, InheritedProperty, Profiled,
};
