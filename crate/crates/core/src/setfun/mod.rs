//! Set functions on finite power sets: k-subadditivity, k-triangularity,
//! semivariation and monotonicity.

pub mod checks;
pub mod function;
pub mod semivariation;
pub mod weights;

pub use checks::{
    check_k_triangular, finite_chain_check, for_each_disjoint_pair, is_k_subadditive, is_monotone,
    k_triangular_witness, minimal_k, TriangularityReport,
};
pub use function::{make_series_setfunction, Backing, FiniteAlgebra, SetFunction, SetFunctionRecord};
pub use semivariation::{semivariation, semivariation_table, semivariation_values, SemivariationTable};
pub use weights::WeightRule;
