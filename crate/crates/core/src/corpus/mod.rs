//! Fixture generators and the checksummed regression corpus.

pub mod fixtures;
pub mod generators;

pub use fixtures::{
    builtin_descriptors, load_payload, verify_corpus, write_corpus, Expectation, Fixture, FixtureCheck,
    FixtureDescriptor, Generator, Manifest, Payload, Provenance, Quantity, MANIFEST,
};
pub use generators::{
    gen_hump_family, gen_measuroid, gen_random_ksubadditive, gen_scaled_family, RandomDraw, ScaleRule,
};
