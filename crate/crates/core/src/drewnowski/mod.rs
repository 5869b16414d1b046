//! Constructive extraction of subsequences of disjoint sets on which an
//! (s)-bounded series-backed set function is continuous from above at `∅`.

pub mod countable;
pub mod extraction;
pub mod pushforward;

pub use countable::{derived_targets, CountableSetFunction, EXACT_LIMIT};
pub use extraction::{
    certify_union, extract_continuous_subsequence, extract_for_family, verify_restricted_continuity, Block, BlockBound,
    DisjointRule, ExtractionConfig, ExtractionLevel, ExtractionTrace,
};
pub use pushforward::{pushforward, pushforward_countable, Pushforward};
