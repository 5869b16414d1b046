//! Fixture descriptors, payloads, expected values with provenance, and the
//! checksummed corpus manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::generators::{gen_hump_family, gen_measuroid, gen_random_ksubadditive, gen_scaled_family, ScaleRule};
use crate::atoms::AtomSet;
use crate::drewnowski::{
    extract_continuous_subsequence, verify_restricted_continuity, CountableSetFunction, DisjointRule, ExtractionConfig,
    ExtractionTrace,
};
use crate::error::{Error, Result};
use crate::lattice::phi::PhiSampler;
use crate::lattice::regulator::Regulator;
use crate::lattice::value::{format_rational, int, opt_rational_serde, rat, rational_serde, LatticeValue, Rational};
use crate::limits::{
    continuity_factor_check, schur_gap, tail_unions, theorem_harness, tight_regulator, HarnessConfig, HarnessInputs,
    SetFunctionFamily, Theorem,
};
use crate::setfun::{is_k_subadditive, is_monotone, k_triangular_witness, semivariation, SetFunction, WeightRule};

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case")]
pub enum Generator {
    Measuroid {
        n: usize,
    },
    ZeroFunction {
        n: usize,
    },
    ScaledFamily {
        n: usize,
        base: WeightRule,
        scales: ScaleRule,
        members: usize,
    },
    /// Humps `{1}, …, {n}`.
    HumpFamily {
        n: usize,
    },
    RandomKSubadditive {
        n: usize,
        #[serde(with = "rational_serde")]
        k: Rational,
        #[serde(with = "rational_serde")]
        bound: Rational,
    },
    /// Measuroid with the tight continuity regulator along the tail unions of singletons.
    FactorInstance {
        n: usize,
        #[serde(with = "rational_serde")]
        k: Rational,
        #[serde(default, with = "opt_rational_serde", skip_serializing_if = "Option::is_none")]
        factor: Option<Rational>,
    },
    /// Extraction trace, optionally with two output indices swapped afterwards.
    Drewnowski {
        base: WeightRule,
        sequence: DisjointRule,
        levels: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        swap: Option<(usize, usize)>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Provenance {
    Paper,
    Derived,
    Trivial,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "quantity", rename_all = "kebab-case")]
pub enum Quantity {
    /// `m(set)`; for families `member` selects `m_j`, absent means the limit.
    Eval {
        set: AtomSet,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        member: Option<usize>,
    },
    Semivariation {
        set: AtomSet,
    },
    Monotone,
    KTriangular {
        #[serde(with = "rational_serde")]
        k: Rational,
    },
    KSubadditive {
        #[serde(with = "rational_serde")]
        k: Rational,
    },
    /// `⋁_j m_j(set)`.
    UniformSup {
        set: AtomSet,
    },
    SchurGap {
        j: usize,
    },
    SchurWitness {
        j: usize,
    },
    Harness {
        theorem: Theorem,
    },
    FactorVerdict,
    TraceVerdict {
        depth: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expectation {
    #[serde(flatten)]
    pub quantity: Quantity,
    pub expected: String,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureDescriptor {
    pub name: String,
    pub generator: Generator,
    pub seed: u64,
    pub expected: Vec<Expectation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Payload {
    Function {
        function: SetFunction,
    },
    Family {
        family: SetFunctionFamily,
    },
    Factor {
        function: SetFunction,
        regulator: Regulator,
        #[serde(with = "rational_serde")]
        k: Rational,
        #[serde(default, with = "opt_rational_serde", skip_serializing_if = "Option::is_none")]
        factor: Option<Rational>,
    },
    Trace {
        trace: ExtractionTrace,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fixture {
    #[serde(flatten)]
    pub descriptor: FixtureDescriptor,
    pub payload: Payload,
}

impl Fixture {
    /// Builds the payload from the descriptor's generator and seed.
    pub fn generate(descriptor: FixtureDescriptor) -> Result<Fixture> {
        let payload = match &descriptor.generator {
            Generator::Measuroid { n } => Payload::Function { function: gen_measuroid(*n)? },
            Generator::ZeroFunction { n } => {
                Payload::Function { function: SetFunction::zero(*n, crate::lattice::Carrier::Scalar)? }
            }
            Generator::ScaledFamily { n, base, scales, members } => {
                Payload::Family { family: gen_scaled_family(&SetFunction::from_rule(base, *n)?, scales, *members)? }
            }
            Generator::HumpFamily { n } => {
                let humps: Vec<AtomSet> = (1..=*n).map(AtomSet::singleton).collect();
                Payload::Family { family: gen_hump_family(*n, &humps)? }
            }
            Generator::RandomKSubadditive { n, k, bound } => {
                Payload::Function { function: gen_random_ksubadditive(*n, k, bound, descriptor.seed)?.function }
            }
            Generator::FactorInstance { n, k, factor } => {
                let m = gen_measuroid(*n)?;
                let singles: Vec<AtomSet> = (1..=*n).map(AtomSet::singleton).collect();
                let chain = tail_unions(&singles);
                let values: Vec<LatticeValue> = chain[..*n].iter().map(|h| m.eval(*h)).collect();
                let regulator = tight_regulator(m.carrier(), &[values], 3, *n)?;
                Payload::Factor { function: m, regulator, k: k.clone(), factor: factor.clone() }
            }
            Generator::Drewnowski { base, sequence, levels, swap } => {
                let m = CountableSetFunction::new(base.clone())?;
                let mut trace =
                    extract_continuous_subsequence(&m, sequence, *levels, None, &ExtractionConfig::default())?;
                if let Some((a, b)) = swap {
                    if *a == 0 || *b == 0 || *a > *levels || *b > *levels {
                        return Err(Error::Fixture(format!("swap ({a}, {b}) outside 1..={levels}")));
                    }
                    trace.output_indices.swap(a - 1, b - 1);
                }
                Payload::Trace { trace }
            }
        };
        Ok(Fixture { descriptor, payload })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Fixture> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn file_name(&self) -> String {
        format!("{}.json", self.descriptor.name)
    }

    /// Computes one quantity on the payload, rendered like the expectations.
    pub fn evaluate(&self, quantity: &Quantity) -> Result<String> {
        let mismatch = || Error::Fixture(format!("{quantity:?} does not apply to fixture {}", self.descriptor.name));
        let config = HarnessConfig { seed: self.descriptor.seed, ..HarnessConfig::default() };
        Ok(match (&self.payload, quantity) {
            (Payload::Function { function: m } | Payload::Factor { function: m, .. }, q) => match q {
                Quantity::Eval { set, member: None } => m.eval(*set).to_string(),
                Quantity::Semivariation { set } => semivariation(m)?.eval(*set).to_string(),
                Quantity::Monotone => is_monotone(m)?.is_holds().to_string(),
                Quantity::KTriangular { k } => k_triangular_witness(m, k)?.is_none().to_string(),
                Quantity::KSubadditive { k } => is_k_subadditive(m, k)?.to_string(),
                Quantity::FactorVerdict => {
                    let Payload::Factor { regulator, k, factor, .. } = &self.payload else { return Err(mismatch()) };
                    let phis = PhiSampler::new(regulator.rows(), regulator.cols(), self.descriptor.seed).sample();
                    let singles: Vec<AtomSet> = (1..=m.atoms()).map(AtomSet::singleton).collect();
                    continuity_factor_check(m, k, regulator, &[singles], &phis, factor.clone())?.verdict.to_string()
                }
                _ => return Err(mismatch()),
            },
            (Payload::Family { family }, q) => match q {
                Quantity::Eval { set, member: Some(j) } => {
                    if *j == 0 || *j > family.len() {
                        return Err(mismatch());
                    }
                    family.member(*j).eval(*set).to_string()
                }
                Quantity::Eval { set, member: None } => {
                    family.limit().ok_or(Error::MissingLimit)?.eval(*set).to_string()
                }
                Quantity::UniformSup { set } => {
                    LatticeValue::join_all(&family.members().iter().map(|m| m.eval(*set)).collect::<Vec<_>>())
                        .expect("non-empty")
                        .to_string()
                }
                Quantity::SchurGap { j } | Quantity::SchurWitness { j } => {
                    let rows = schur_gap(family, family.algebra().atoms())?;
                    let row = rows.get(j.wrapping_sub(1)).ok_or_else(mismatch)?;
                    match q {
                        Quantity::SchurGap { .. } => row.gap.to_string(),
                        _ => row.witness.map_or("-".into(), |w| w.to_string()),
                    }
                }
                Quantity::Harness { theorem } => {
                    let inputs = HarnessInputs::defaults(family.algebra().atoms())?;
                    theorem_harness(family, *theorem, &inputs, &config)?.verdict.to_string()
                }
                Quantity::KTriangular { k } => family
                    .members()
                    .iter()
                    .map(|m| Ok(k_triangular_witness(m, k)?.is_none()))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .all(|b| b)
                    .to_string(),
                _ => return Err(mismatch()),
            },
            (Payload::Trace { trace }, Quantity::TraceVerdict { depth }) => {
                verify_restricted_continuity(trace, &trace.functions, *depth, 16, self.descriptor.seed)?
                    .verdict
                    .to_string()
            }
            _ => return Err(mismatch()),
        })
    }
}

fn expect(quantity: Quantity, expected: impl Into<String>, provenance: Provenance) -> Expectation {
    Expectation { quantity, expected: expected.into(), provenance }
}

fn set(atoms: &[usize]) -> AtomSet {
    AtomSet::from_atoms(atoms.iter().copied()).expect("small atoms")
}

fn r(n: i64, d: i64) -> String {
    format_rational(&rat(n, d))
}

/// The shipped corpus.
pub fn builtin_descriptors() -> Vec<FixtureDescriptor> {
    use Provenance::*;
    use Quantity::*;
    let alt2 = WeightRule::AlternatingPower { p: 2 };
    let d = |name: &str, generator: Generator, seed: u64, expected: Vec<Expectation>| FixtureDescriptor {
        name: name.into(),
        generator,
        seed,
        expected,
    };
    let mut out = vec![
        d(
            "measuroid-3",
            Generator::Measuroid { n: 3 },
            0,
            vec![
                expect(Eval { set: set(&[1, 3]), member: None }, r(10, 9), Paper),
                expect(Eval { set: set(&[1, 2, 3]), member: None }, r(31, 36), Paper),
                expect(Eval { set: AtomSet::EMPTY, member: None }, r(0, 1), Trivial),
                expect(Semivariation { set: set(&[1, 2, 3]) }, r(10, 9), Derived),
                expect(Monotone, "false", Derived),
                expect(KTriangular { k: int(1) }, "true", Derived),
                expect(KTriangular { k: int(0) }, "false", Derived),
            ],
        ),
        d(
            "measuroid-8",
            Generator::Measuroid { n: 8 },
            0,
            vec![
                expect(KTriangular { k: int(1) }, "true", Derived),
                expect(Monotone, "false", Derived),
                expect(Eval { set: set(&[2, 4, 6, 8]), member: None }, r(205, 576), Derived),
            ],
        ),
        d(
            "zero-5",
            Generator::ZeroFunction { n: 5 },
            0,
            vec![
                expect(Eval { set: AtomSet::full(5), member: None }, r(0, 1), Trivial),
                expect(Monotone, "true", Trivial),
                expect(KTriangular { k: int(0) }, "true", Trivial),
            ],
        ),
        d(
            "scaled-measuroid-3",
            Generator::ScaledFamily { n: 3, base: alt2.clone(), scales: ScaleRule::OnePlusInverse, members: 50 },
            0,
            vec![
                expect(SchurGap { j: 1 }, r(10, 9), Derived),
                expect(SchurGap { j: 2 }, r(5, 9), Derived),
                expect(SchurGap { j: 50 }, r(1, 45), Derived),
                expect(SchurWitness { j: 7 }, "{1,3}", Derived),
                expect(Eval { set: set(&[1, 3]), member: None }, r(10, 9), Paper),
                expect(KTriangular { k: int(1) }, "true", Derived),
            ],
        ),
        d(
            "two-minus-inverse-3",
            Generator::ScaledFamily { n: 3, base: alt2.clone(), scales: ScaleRule::TwoMinusInverse, members: 6 },
            0,
            vec![
                expect(Eval { set: set(&[1, 3]), member: None }, r(20, 9), Derived),
                expect(Eval { set: set(&[1, 3]), member: Some(2) }, r(5, 3), Derived),
                expect(SchurGap { j: 3 }, r(10, 27), Derived),
            ],
        ),
        d(
            "constant-measuroid-4",
            Generator::ScaledFamily { n: 4, base: alt2.clone(), scales: ScaleRule::Constant { c: int(1) }, members: 3 },
            0,
            vec![
                expect(SchurGap { j: 2 }, r(0, 1), Trivial),
                expect(Harness { theorem: Theorem::BJ }, "CONSISTENT", Trivial),
                expect(Harness { theorem: Theorem::N }, "CONSISTENT", Trivial),
                expect(Harness { theorem: Theorem::VHS }, "CONSISTENT", Trivial),
                expect(Harness { theorem: Theorem::S }, "CONSISTENT", Trivial),
            ],
        ),
        d(
            "harness-scaled-measuroid-3",
            Generator::ScaledFamily { n: 3, base: alt2.clone(), scales: ScaleRule::OnePlusInverse, members: 8 },
            1,
            Theorem::ALL.iter().map(|t| expect(Harness { theorem: *t }, "CONSISTENT", Derived)).collect(),
        ),
        d(
            "additive-geometric-5",
            Generator::ScaledFamily {
                n: 5,
                base: WeightRule::Geometric { q: rat(1, 2) },
                scales: ScaleRule::OnePlusInverse,
                members: 6,
            },
            2,
            Theorem::ALL.iter().map(|t| expect(Harness { theorem: *t }, "CONSISTENT", Derived)).collect(),
        ),
        d(
            "hump-10",
            Generator::HumpFamily { n: 10 },
            0,
            vec![
                expect(UniformSup { set: set(&[4]) }, r(1, 1), Derived),
                expect(Eval { set: AtomSet::full(10), member: Some(3) }, r(1, 1), Trivial),
                expect(Eval { set: AtomSet::EMPTY, member: Some(3) }, r(0, 1), Trivial),
                expect(SchurGap { j: 5 }, r(1, 1), Derived),
                expect(KTriangular { k: int(1) }, "true", Derived),
            ]
            .into_iter()
            .chain(Theorem::ALL.iter().map(|t| expect(Harness { theorem: *t }, "HYPOTHESIS-NOT-MET", Derived)))
            .collect(),
        ),
        d(
            "factor-measuroid-8",
            Generator::FactorInstance { n: 8, k: int(1), factor: None },
            0,
            vec![expect(FactorVerdict, "HOLDS-AT-HORIZON", Paper)],
        ),
        d(
            "factor-misscaled-measuroid-8",
            Generator::FactorInstance { n: 8, k: int(1), factor: Some(int(1)) },
            0,
            vec![expect(FactorVerdict, "VIOLATED", Derived)],
        ),
        d(
            "drewnowski-alternating-6",
            Generator::Drewnowski { base: alt2.clone(), sequence: DisjointRule::Singletons, levels: 6, swap: None },
            0,
            vec![expect(TraceVerdict { depth: 6 }, "HOLDS-AT-HORIZON", Derived)],
        ),
        d(
            "drewnowski-corrupted-6",
            Generator::Drewnowski { base: alt2, sequence: DisjointRule::Singletons, levels: 6, swap: Some((2, 5)) },
            0,
            vec![expect(TraceVerdict { depth: 6 }, "VIOLATED", Derived)],
        ),
    ];
    for (i, (n, k)) in [(4usize, 1i64), (6, 2), (8, 3)].into_iter().enumerate() {
        out.push(d(
            &format!("random-ksubadditive-n{n}-k{k}"),
            Generator::RandomKSubadditive { n, k: int(k), bound: int(1) },
            100 + i as u64,
            vec![
                expect(KSubadditive { k: int(k) }, "true", Derived),
                expect(Eval { set: AtomSet::EMPTY, member: None }, r(0, 1), Trivial),
            ],
        ));
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub fixtures: Vec<ManifestEntry>,
}

/// Regenerates every builtin fixture into `dir` and writes the manifest.
pub fn write_corpus(dir: &Path) -> Result<Manifest> {
    fs::create_dir_all(dir)?;
    let mut manifest = Manifest::default();
    for desc in builtin_descriptors() {
        let fixture = Fixture::generate(desc)?;
        let text = fixture.to_json()?;
        fs::write(dir.join(fixture.file_name()), &text)?;
        manifest.fixtures.push(ManifestEntry { file: fixture.file_name(), sha256: sha256_hex(text.as_bytes()) });
    }
    fs::write(dir.join(MANIFEST), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(manifest)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectationResult {
    #[serde(flatten)]
    pub expectation: Expectation,
    pub actual: String,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureCheck {
    pub file: String,
    pub checksum_ok: bool,
    /// Regenerating from the descriptor reproduces the file byte for byte.
    pub regenerates: bool,
    pub expectations: Vec<ExpectationResult>,
}

impl FixtureCheck {
    pub fn ok(&self) -> bool {
        self.checksum_ok && self.regenerates && self.expectations.iter().all(|e| e.ok)
    }
}

/// Checksums, regeneration and every expected value of the corpus in `dir`.
pub fn verify_corpus(dir: &Path) -> Result<Vec<FixtureCheck>> {
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST))?)?;
    let mut seen = BTreeMap::new();
    manifest
        .fixtures
        .iter()
        .map(|entry| {
            if seen.insert(entry.file.clone(), ()).is_some() {
                return Err(Error::Fixture(format!("{} listed twice", entry.file)));
            }
            let text = fs::read_to_string(dir.join(&entry.file))?;
            let fixture = Fixture::from_json(&text)?;
            let regenerated = Fixture::generate(fixture.descriptor.clone())?.to_json()?;
            let expectations = fixture
                .descriptor
                .expected
                .iter()
                .map(|e| {
                    let actual = fixture.evaluate(&e.quantity)?;
                    Ok(ExpectationResult { ok: actual == e.expected, expectation: e.clone(), actual })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(FixtureCheck {
                file: entry.file.clone(),
                checksum_ok: sha256_hex(text.as_bytes()) == entry.sha256,
                regenerates: regenerated == text,
                expectations,
            })
        })
        .collect()
}

/// Loads a function, family, or fixture file holding either.
pub fn load_payload(text: &str) -> Result<Payload> {
    if let Ok(f) = serde_json::from_str::<Fixture>(text) {
        return Ok(f.payload);
    }
    if let Ok(family) = serde_json::from_str::<SetFunctionFamily>(text) {
        return Ok(Payload::Family { family });
    }
    match serde_json::from_str::<SetFunction>(text) {
        Ok(function) => Ok(Payload::Function { function }),
        Err(e) => Err(Error::Fixture(format!("not a fixture, family or set function: {e}"))),
    }
}
