//! Instance-level harness for the Brooks–Jewett, Nikodým, Vitali–Hahn–Saks
//! and Schur convergence theorems, plus the exhaustive Schur gap.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::family::{
    nonempty_prefix, tail_chain, validate_chain, validate_decreasing, validate_disjoint, SetFunctionFamily, Submeasure,
};
use super::profiles::{decay_certificate, tight_regulator};
use crate::atoms::AtomSet;
use crate::error::{Error, Result};
use crate::lattice::convergence::{d_converges_with_sups, sup_table, Certificate, Horizon, Witness};
use crate::lattice::fremlin::{fremlin_check, fremlin_combine};
use crate::lattice::phi::PhiSampler;
use crate::lattice::regulator::{IndexMap, Regulator};
use crate::lattice::value::{int, rational_serde, Carrier, LatticeValue, Rational};
use crate::lattice::Verdict;
use crate::setfun::{k_triangular_witness, SetFunction};

/// Largest ground set swept exhaustively by [`schur_gap`].
pub const MAX_SCHUR_ATOMS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Theorem {
    BJ,
    N,
    VHS,
    S,
}

impl Theorem {
    pub const ALL: [Theorem; 4] = [Theorem::BJ, Theorem::N, Theorem::VHS, Theorem::S];
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Theorem::BJ => "BJ",
            Theorem::N => "N",
            Theorem::VHS => "VHS",
            Theorem::S => "S",
        })
    }
}

impl FromStr for Theorem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "BJ" => Ok(Theorem::BJ),
            "N" => Ok(Theorem::N),
            "VHS" => Ok(Theorem::VHS),
            "S" => Ok(Theorem::S),
            other => Err(Error::Parse(format!("unknown theorem {other:?} (expected BJ, N, VHS or S)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarnessConfig {
    #[serde(with = "rational_serde")]
    pub k: Rational,
    pub seed: u64,
    pub random_phis: usize,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig { k: int(1), seed: 0, random_phis: 200 }
    }
}

/// Sequences, chains and submeasure the theorem is exercised on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarnessInputs {
    pub sequences: Vec<Vec<AtomSet>>,
    pub chains: Vec<Vec<AtomSet>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Submeasure>,
    /// Per-member property regulators; derived from the profiles when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub member_regulators: Option<Vec<Regulator>>,
}

impl HarnessInputs {
    /// Singletons, the tail chain `{h..n}` and the normalized counting submeasure.
    pub fn defaults(n: usize) -> Result<Self> {
        Ok(HarnessInputs {
            sequences: vec![(1..=n).map(AtomSet::singleton).collect()],
            chains: vec![tail_chain(1, n)],
            eta: Some(Submeasure::normalized_counting(n)?),
            member_regulators: None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HarnessVerdict {
    #[serde(rename = "CONSISTENT")]
    Consistent,
    #[serde(rename = "VIOLATION")]
    Violation,
    #[serde(rename = "HYPOTHESIS-NOT-MET")]
    HypothesisNotMet,
}

impl fmt::Display for HarnessVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HarnessVerdict::Consistent => "CONSISTENT",
            HarnessVerdict::Violation => "VIOLATION",
            HarnessVerdict::HypothesisNotMet => "HYPOTHESIS-NOT-MET",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub certificate: Certificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarnessReport {
    pub theorem: Theorem,
    pub verdict: HarnessVerdict,
    /// Names of failed hypotheses, or of violated conclusions.
    pub failed: Vec<String>,
    pub hypotheses: Vec<CheckRecord>,
    pub conclusions: Vec<CheckRecord>,
    #[serde(with = "rational_serde")]
    pub k: Rational,
    pub seed: u64,
    pub equibound: LatticeValue,
    /// Combined per-member regulator `a`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub combined_regulator: Option<Regulator>,
    /// Pointwise convergence regulator `b`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_regulator: Option<Regulator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schur_gap: Option<Vec<GapRow>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapRow {
    pub j: usize,
    pub gap: LatticeValue,
    /// First set in ascending bitmask order attaining the gap (scalar carriers).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<AtomSet>,
}

/// `⋁_E |m_j(E) - m_0(E)|` over all `2^n` sets, for each member.
pub fn schur_gap(family: &SetFunctionFamily, n: usize) -> Result<Vec<GapRow>> {
    let limit = family.limit().ok_or(Error::MissingLimit)?;
    if n > MAX_SCHUR_ATOMS {
        return Err(Error::TooLarge { what: "schur sweep atoms", n, max: MAX_SCHUR_ATOMS });
    }
    if n != family.algebra().atoms() {
        return Err(Error::DimensionMismatch(format!(
            "schur gap over {n} atoms for a family on {}",
            family.algebra().atoms()
        )));
    }
    let base = limit.values()?;
    let scalar = family.carrier() == Carrier::Scalar;
    family
        .members()
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let values = m.values()?;
            let mut gap = LatticeValue::zero(family.carrier());
            let mut witness = AtomSet::EMPTY;
            for (mask, (x, y)) in values.iter().zip(base.iter()).enumerate() {
                let d = (x - y).abs();
                if scalar && !d.le(&gap) {
                    witness = AtomSet(mask as u32);
                }
                gap = gap.join(&d);
            }
            Ok(GapRow { j: i + 1, gap, witness: scalar.then_some(witness) })
        })
        .collect()
}

struct Run<'a> {
    family: &'a SetFunctionFamily,
    inputs: &'a HarnessInputs,
    k: Rational,
    phis: Vec<IndexMap>,
    horizon: Horizon,
    hypotheses: Vec<CheckRecord>,
    conclusions: Vec<CheckRecord>,
}

impl Run<'_> {
    fn decay(&self, values: &[LatticeValue], reg: &Regulator, sets: &[AtomSet]) -> Result<Certificate> {
        let sups = sup_table(reg, &self.phis)?;
        let mut cert = decay_certificate(values, reg, &self.phis, &sups)?;
        cert.regulator = None;
        if let Some(w) = cert.witness.as_mut() {
            w.sets = w.indices.iter().filter_map(|&i| sets.get(i - 1).copied()).collect();
        }
        Ok(cert)
    }

    fn all_decay(&self, named: Vec<(Vec<LatticeValue>, Vec<AtomSet>)>, reg: &Regulator) -> Result<Certificate> {
        let mut n0 = 1;
        for (values, sets) in named {
            let cert = self.decay(&values, reg, &sets)?;
            if !cert.is_holds() {
                return Ok(cert);
            }
            n0 = n0.max(cert.n0.unwrap_or(1));
        }
        let mut cert = Certificate::holds(self.horizon);
        cert.n0 = Some(n0);
        Ok(cert)
    }

    fn hypothesis(&mut self, name: impl Into<String>, cert: Certificate) {
        self.hypotheses.push(CheckRecord { name: name.into(), certificate: cert });
    }

    fn conclusion(&mut self, name: impl Into<String>, cert: Certificate) {
        self.conclusions.push(CheckRecord { name: name.into(), certificate: cert });
    }

    fn k_triangular(&self, m: &SetFunction, who: &str) -> Result<Certificate> {
        let Some((a, b)) = k_triangular_witness(m, &self.k)? else {
            return Ok(Certificate::holds(self.horizon));
        };
        let witness = Witness::new(format!("{who} is {}-triangular", self.k)).sets(vec![a, b]).values(vec![
            m.eval(a),
            m.eval(b),
            m.eval(a.union(b)),
        ]);
        Ok(Certificate::violated(self.horizon, witness))
    }

    fn seq_values(&self, m: &SetFunction) -> Vec<(Vec<LatticeValue>, Vec<AtomSet>)> {
        self.inputs.sequences.iter().map(|s| (s.iter().map(|c| m.eval(*c)).collect(), s.clone())).collect()
    }

    fn chain_values(&self, f: impl Fn(AtomSet) -> LatticeValue) -> Vec<(Vec<LatticeValue>, Vec<AtomSet>)> {
        self.inputs
            .chains
            .iter()
            .map(|c| {
                let live = nonempty_prefix(c);
                (live.iter().map(|h| f(*h)).collect(), live.to_vec())
            })
            .collect()
    }

    fn uniform_seq_values(&self) -> Vec<(Vec<LatticeValue>, Vec<AtomSet>)> {
        self.inputs.sequences.iter().map(|s| (s.iter().map(|c| self.uniform_eval(*c)).collect(), s.clone())).collect()
    }

    fn uniform_eval(&self, set: AtomSet) -> LatticeValue {
        LatticeValue::join_all(&self.family.members().iter().map(|m| m.eval(set)).collect::<Vec<_>>())
            .expect("non-empty family")
    }
}

fn fail_name(theorem: Theorem, name: &str) -> String {
    format!("{theorem}: {name}")
}

/// Checks every hypothesis of `theorem` on `family`, then every conclusion,
/// at the sampled horizon.
pub fn theorem_harness(
    family: &SetFunctionFamily,
    theorem: Theorem,
    inputs: &HarnessInputs,
    config: &HarnessConfig,
) -> Result<HarnessReport> {
    let algebra = family.algebra();
    let carrier = family.carrier();
    for s in &inputs.sequences {
        validate_disjoint(algebra, s)?;
    }
    for c in &inputs.chains {
        validate_chain(algebra, c)?;
    }
    if let Some(eta) = &inputs.eta {
        if eta.function().algebra() != algebra {
            return Err(Error::DimensionMismatch("submeasure and family live on different algebras".into()));
        }
    }
    if theorem == Theorem::VHS {
        let eta = inputs.eta.as_ref().ok_or(Error::EmptyInput("submeasure for the VHS harness"))?;
        for c in &inputs.chains {
            validate_decreasing(algebra, c)?;
            let last = *c.last().expect("validated");
            if !eta.eval(last).is_zero() {
                return Err(Error::NotTauNull(format!("η({last}) = {}", eta.eval(last))));
            }
        }
    }
    if let Some(regs) = &inputs.member_regulators {
        if regs.len() != family.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} member regulators for {} members",
                regs.len(),
                family.len()
            )));
        }
        if let Some(r) = regs.iter().find(|r| r.carrier() != carrier) {
            return Err(Error::CarrierMismatch { expected: carrier.to_string(), found: r.carrier().to_string() });
        }
    }

    let tables = family.semivariation_tables()?;
    let u = family.exact_equibound()?;
    let j_count = family.len();
    let longest = inputs.sequences.iter().chain(&inputs.chains).map(Vec::len).max().unwrap_or(1);

    // per-member regulators: given, or tight along the tested sets
    let profile_sets = |j: usize| -> Vec<Vec<LatticeValue>> {
        let m = family.member(j);
        let v = &tables[j - 1];
        let seqs = inputs.sequences.iter().map(|s| s.iter().map(|c| m.eval(*c)).collect::<Vec<_>>());
        let chains_m = inputs.chains.iter().map(|c| nonempty_prefix(c).iter().map(|h| m.eval(*h)).collect::<Vec<_>>());
        let chains_v = inputs
            .chains
            .iter()
            .map(|c| nonempty_prefix(c).iter().map(|h| v[h.bits() as usize].clone()).collect::<Vec<_>>());
        match theorem {
            Theorem::BJ => seqs.collect(),
            Theorem::N | Theorem::S => chains_v.collect(),
            Theorem::VHS => seqs.chain(chains_m).collect(),
        }
    };
    let member_regs: Vec<Regulator> = match &inputs.member_regulators {
        Some(r) => r.clone(),
        None => (1..=j_count).map(|j| tight_regulator(carrier, &profile_sets(j), 1, longest)).collect::<Result<_>>()?,
    };
    let b = family.convergence_regulator();
    let cols = member_regs
        .iter()
        .map(Regulator::cols)
        .chain(b.map(Regulator::cols))
        .chain([longest])
        .max()
        .expect("non-empty");
    let member_regs: Vec<Regulator> = member_regs.iter().map(|r| r.padded(r.rows(), cols)).collect();
    let a = fremlin_combine(&member_regs, &u)?;
    let rows = a.rows().max(b.map_or(1, Regulator::rows));
    let a = a.padded(rows, cols);
    let b_pad = b.map(|b| b.padded(rows, cols));
    let phis = PhiSampler::new(rows, cols, config.seed).with_random(config.random_phis).sample();
    let horizon = Horizon { rows, cols, length: longest.max(j_count), phi_samples: phis.len() };
    let mut run =
        Run { family, inputs, k: config.k.clone(), phis, horizon, hypotheses: Vec::new(), conclusions: Vec::new() };

    // hypotheses
    let declared = family.equibound();
    let equi = if u.le(declared) {
        Certificate::holds(horizon)
    } else {
        Certificate::violated(
            horizon,
            Witness::new("m_j(A) <= u for every j and A").values(vec![u.clone(), declared.clone()]),
        )
    };
    run.hypothesis("equibounded", equi);
    for j in 1..=j_count {
        let cert = run.k_triangular(family.member(j), &format!("m_{j}"))?;
        if !cert.is_holds() {
            run.hypothesis(format!("k-triangular (member {j})"), cert);
            break;
        }
        if j == j_count {
            run.hypothesis("k-triangular", cert);
        }
    }
    run.hypothesis("pointwise convergence", pointwise_convergence(family, b_pad.as_ref(), &run.phis, horizon)?);
    let property = match theorem {
        Theorem::BJ => "s-bounded",
        Theorem::N | Theorem::S => "continuous from above at the empty set",
        Theorem::VHS => "tau-continuous",
    };
    let mut per_member = Certificate::holds(horizon);
    for j in 1..=j_count {
        let m = family.member(j);
        let reg = member_regs[j - 1].padded(rows, cols);
        let named = match theorem {
            Theorem::BJ => run.seq_values(m),
            Theorem::N | Theorem::S => run.chain_values(|h| m.eval(h)),
            Theorem::VHS => {
                let mut all = run.seq_values(m);
                all.extend(run.chain_values(|h| m.eval(h)));
                all
            }
        };
        let cert = run.all_decay(named, &reg)?;
        if !cert.is_holds() {
            per_member = cert;
            if let Some(w) = per_member.witness.as_mut() {
                w.label = format!("member {j}: {}", w.label);
            }
            break;
        }
    }
    run.hypothesis(format!("{property} (each member)"), per_member);

    let failed: Vec<String> =
        run.hypotheses.iter().filter(|r| !r.certificate.is_holds()).map(|r| fail_name(theorem, &r.name)).collect();
    if !failed.is_empty() {
        for r in run.hypotheses.iter_mut().filter(|r| !r.certificate.is_holds()) {
            r.certificate.verdict = Verdict::HypothesisNotMet;
        }
        return Ok(HarnessReport {
            theorem,
            verdict: HarnessVerdict::HypothesisNotMet,
            failed,
            hypotheses: run.hypotheses,
            conclusions: Vec::new(),
            k: config.k.clone(),
            seed: config.seed,
            equibound: u,
            combined_regulator: Some(a),
            limit_regulator: b_pad,
            schur_gap: None,
        });
    }
    let b = b_pad.expect("checked by the convergence hypothesis");
    let m0 = family.limit().expect("checked by the convergence hypothesis");

    // conclusions
    let fremlin = fremlin_check(&member_regs, &u, &a, &run.phis)?;
    let cert = match fremlin.failures.first() {
        None => Certificate::holds(horizon),
        Some((q, phi)) => Certificate::violated(
            horizon,
            Witness::new("u ∧ Σ_{j<=q} sup_t a^(j)(t, phi(t+j)) <= sup_t a(t, phi(t))")
                .phi(phi.clone())
                .indices(vec![*q]),
        ),
    };
    run.conclusion("combined regulator dominates the member regulators", cert);
    let k1 = &config.k + int(1);
    let ab = a.sum(&b)?;
    let limit_reg = ab.scaled(&(int(2) * &k1));
    let cert = run.k_triangular(m0, "m_0")?;
    run.conclusion("m_0 k-triangular", cert);
    match theorem {
        Theorem::BJ => {
            let k2 = &config.k + int(2);
            let c = ab.scaled(&(int(2) * &k2 * &k2));
            let cert = run.all_decay(run.uniform_seq_values(), &c)?;
            run.conclusion("uniformly s-bounded", cert);
            let cert = run.all_decay(run.seq_values(m0), &c)?;
            run.conclusion("m_0 s-bounded", cert);
        }
        Theorem::N | Theorem::S => {
            let uniform = run.chain_values(|h| {
                LatticeValue::join_all(tables.iter().map(|t| &t[h.bits() as usize])).expect("non-empty family")
            });
            let cert = run.all_decay(uniform, &a.scaled(&k1))?;
            run.conclusion("uniformly continuous from above at the empty set", cert);
            let cert = run.all_decay(run.chain_values(|h| m0.eval(h)), &limit_reg)?;
            run.conclusion("m_0 continuous from above at the empty set", cert);
        }
        Theorem::VHS => {
            let mut uniform = run.uniform_seq_values();
            uniform.extend(run.chain_values(|h| run.uniform_eval(h)));
            let cert = run.all_decay(uniform, &a)?;
            run.conclusion("uniformly tau-continuous", cert);
            let mut limit_vals = run.seq_values(m0);
            limit_vals.extend(run.chain_values(|h| m0.eval(h)));
            let cert = run.all_decay(limit_vals, &limit_reg)?;
            run.conclusion("m_0 tau-continuous", cert);
        }
    }
    let mut gaps = None;
    if theorem == Theorem::S {
        let rows = schur_gap(family, algebra.atoms())?;
        let values: Vec<LatticeValue> = rows.iter().map(|r| r.gap.clone()).collect();
        let sups = sup_table(&limit_reg, &run.phis)?;
        let mut cert = d_converges_with_sups(&values, &LatticeValue::zero(carrier), &limit_reg, &run.phis, &sups)?;
        cert.regulator = None;
        run.conclusion("schur gap tends to 0", cert);
        gaps = Some(rows);
    }

    let failed: Vec<String> =
        run.conclusions.iter().filter(|r| !r.certificate.is_holds()).map(|r| fail_name(theorem, &r.name)).collect();
    Ok(HarnessReport {
        theorem,
        verdict: if failed.is_empty() { HarnessVerdict::Consistent } else { HarnessVerdict::Violation },
        failed,
        hypotheses: run.hypotheses,
        conclusions: run.conclusions,
        k: config.k.clone(),
        seed: config.seed,
        equibound: u,
        combined_regulator: Some(a),
        limit_regulator: Some(b),
        schur_gap: gaps,
    })
}

/// `(D)lim_j m_j(E) = m_0(E)` for every `E`, all w.r.t. `b`.
fn pointwise_convergence(
    family: &SetFunctionFamily,
    b: Option<&Regulator>,
    phis: &[IndexMap],
    horizon: Horizon,
) -> Result<Certificate> {
    let (Some(m0), Some(b)) = (family.limit(), b) else {
        let what = if family.limit().is_none() { "no declared limit" } else { "no convergence regulator" };
        return Ok(Certificate::violated(horizon, Witness::new(what)));
    };
    let sups = sup_table(b, phis)?;
    // the check holds for a set iff its last deviation is below every sampled supremum
    let floor = sups.iter().skip(1).fold(sups[0].clone(), |acc, s| acc.meet(s));
    let tables: Vec<_> = family.members().iter().map(|m| m.values()).collect::<Result<_>>()?;
    let base = m0.values()?;
    let last = tables.last().expect("non-empty family");
    for (mask, limit) in base.iter().enumerate() {
        if (&last[mask] - limit).abs().le(&floor) {
            continue;
        }
        let seq: Vec<LatticeValue> = tables.iter().map(|t| t[mask].clone()).collect();
        let mut cert = d_converges_with_sups(&seq, limit, b, phis, &sups)?;
        if cert.is_holds() {
            continue;
        }
        cert.regulator = None;
        if let Some(w) = cert.witness.as_mut() {
            w.label = format!("m_j(E) -> m_0(E): {}", w.label);
            w.sets = vec![AtomSet(mask as u32)];
        }
        return Ok(cert);
    }
    Ok(Certificate::holds(horizon))
}
