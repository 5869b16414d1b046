//! Decay profiles along disjoint sequences and decreasing chains, and the
//! instance checks built on them.
//!
//! A decreasing chain with empty intersection in a finite algebra ends in
//! `∅`, where every value vanishes; decay is checked on the members before
//! that terminal run.

use serde::{Deserialize, Serialize};

use super::family::{
    nonempty_prefix, tail_unions, validate_chain, validate_decreasing, validate_disjoint, Scope, SetFunctionFamily,
    Submeasure,
};
use crate::atoms::AtomSet;
use crate::error::{Error, Result};
use crate::lattice::convergence::{
    d_converges_with_sups, first_stable_index, sup_table, Certificate, Horizon, Witness,
};
use crate::lattice::regulator::{IndexMap, Regulator};
use crate::lattice::value::{int, Carrier, LatticeValue, Rational};
use crate::setfun::{k_triangular_witness, SetFunction};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub labels: Vec<AtomSet>,
    pub values: Vec<LatticeValue>,
    pub uniform: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Profiled {
    pub profile: DecayProfile,
    pub certificate: Certificate,
}

/// `(D)lim values = 0` at horizon; an empty profile holds trivially.
pub fn decay_certificate(
    values: &[LatticeValue],
    reg: &Regulator,
    phis: &[IndexMap],
    sups: &[LatticeValue],
) -> Result<Certificate> {
    if values.is_empty() {
        let horizon = Horizon { rows: reg.rows(), cols: reg.cols(), length: 0, phi_samples: phis.len() };
        let mut cert = Certificate::holds(horizon).with_regulator(reg);
        cert.n0 = Some(1);
        return Ok(cert);
    }
    d_converges_with_sups(values, &LatticeValue::zero(reg.carrier()), reg, phis, sups)
}

fn relabel(mut cert: Certificate, context: &str, sets: &[AtomSet]) -> Certificate {
    if let Some(w) = cert.witness.as_mut() {
        w.label = format!("{context}: {}", w.label);
        if w.sets.is_empty() {
            w.sets = w.indices.iter().filter_map(|&i| sets.get(i - 1).copied()).collect();
        }
    }
    cert
}

fn member_values(family: &SetFunctionFamily, scope: Scope, sets: &[AtomSet]) -> Vec<LatticeValue> {
    sets.iter()
        .map(|s| match scope {
            Scope::Member(j) => family.member(j).eval(*s),
            Scope::Uniform => LatticeValue::join_all(&family.members().iter().map(|m| m.eval(*s)).collect::<Vec<_>>())
                .expect("non-empty family"),
        })
        .collect()
}

fn envelope_values(tables: &[Vec<LatticeValue>], scope: Scope, sets: &[AtomSet]) -> Vec<LatticeValue> {
    sets.iter()
        .map(|s| {
            let idx = s.bits() as usize;
            match scope {
                Scope::Member(j) => tables[j - 1][idx].clone(),
                Scope::Uniform => LatticeValue::join_all(tables.iter().map(|t| &t[idx])).expect("non-empty family"),
            }
        })
        .collect()
}

fn check_regulator(family: &SetFunctionFamily, reg: &Regulator) -> Result<()> {
    if reg.carrier() != family.carrier() {
        return Err(Error::CarrierMismatch {
            expected: family.carrier().to_string(),
            found: reg.carrier().to_string(),
        });
    }
    Ok(())
}

/// Tracks `m_j(C_h)` or `⋁_j m_j(C_h)` along a disjoint sequence.
pub fn s_bounded_profile(
    family: &SetFunctionFamily,
    seq: &[AtomSet],
    scope: Scope,
    reg: &Regulator,
    phis: &[IndexMap],
) -> Result<Profiled> {
    scope.check(family)?;
    check_regulator(family, reg)?;
    validate_disjoint(family.algebra(), seq)?;
    let values = member_values(family, scope, seq);
    let sups = sup_table(reg, phis)?;
    let certificate = relabel(decay_certificate(&values, reg, phis, &sups)?, "s-bounded", seq);
    Ok(Profiled { profile: DecayProfile { labels: seq.to_vec(), values, uniform: scope.is_uniform() }, certificate })
}

/// Tracks `m_j(H_n)` for one member, or `⋁_j v(m_j)(H_n)` uniformly.
pub fn continuity_profile(
    family: &SetFunctionFamily,
    chain: &[AtomSet],
    scope: Scope,
    reg: &Regulator,
    phis: &[IndexMap],
) -> Result<Profiled> {
    scope.check(family)?;
    check_regulator(family, reg)?;
    validate_chain(family.algebra(), chain)?;
    let values = match scope {
        Scope::Member(_) => member_values(family, scope, chain),
        Scope::Uniform => envelope_values(&family.semivariation_tables()?, scope, chain),
    };
    let live = nonempty_prefix(chain).len();
    let sups = sup_table(reg, phis)?;
    let certificate = relabel(decay_certificate(&values[..live], reg, phis, &sups)?, "continuity", chain);
    Ok(Profiled { profile: DecayProfile { labels: chain.to_vec(), values, uniform: scope.is_uniform() }, certificate })
}

/// `σ_l = ⋁_p max_{h ≥ l} profile_p[h]`, the last term repeated past the end:
/// the tightest constant-row regulator every given profile decays against.
pub fn tight_regulator(
    carrier: Carrier,
    profiles: &[Vec<LatticeValue>],
    rows: usize,
    cols: usize,
) -> Result<Regulator> {
    let cols = cols.max(1).max(profiles.iter().map(Vec::len).max().unwrap_or(1));
    let mut sigma = vec![LatticeValue::zero(carrier); cols];
    for p in profiles.iter().filter(|p| !p.is_empty()) {
        let mut suffix = p.last().expect("non-empty").clone();
        for l in (0..cols).rev() {
            if l < p.len() {
                suffix = suffix.join(&p[l]);
            }
            sigma[l] = sigma[l].join(&suffix);
        }
    }
    Regulator::new(vec![sigma; rows.max(1)])
}

fn combine(certs: Vec<Certificate>, horizon: Horizon, reg: &Regulator) -> Certificate {
    let mut n0 = 1;
    for c in certs {
        if !c.is_holds() {
            return c;
        }
        n0 = n0.max(c.n0.unwrap_or(1));
    }
    let mut cert = Certificate::holds(horizon).with_regulator(reg);
    cert.n0 = Some(n0);
    cert
}

fn horizon_of(reg: &Regulator, phis: &[IndexMap], length: usize) -> Horizon {
    Horizon { rows: reg.rows(), cols: reg.cols(), length, phi_samples: phis.len() }
}

fn hypothesis_failed(mut cert: Certificate) -> Certificate {
    cert.verdict = crate::lattice::Verdict::HypothesisNotMet;
    cert
}

fn k_triangular_certificate(m: &SetFunction, k: &Rational, horizon: Horizon, name: &str) -> Result<Certificate> {
    let Some((a, b)) = k_triangular_witness(m, k)? else {
        return Ok(Certificate::holds(horizon));
    };
    let witness = Witness::new(format!("{name} is not {k}-triangular")).sets(vec![a, b]).values(vec![
        m.eval(a),
        m.eval(b),
        m.eval(a.union(b)),
    ]);
    Ok(Certificate::violated(horizon, witness))
}

/// Continuity along `H_h = ⋃_{i≥h} C_i` yields `m(C_h) <= factor·⋁_t a_{t,φ(t)}`
/// for every `h` from the continuity index `n₀(φ)` on. The factor defaults to
/// `k + 1`, which k-triangularity guarantees.
pub fn continuity_factor_check(
    m: &SetFunction,
    k: &Rational,
    reg: &Regulator,
    sequences: &[Vec<AtomSet>],
    phis: &[IndexMap],
    factor: Option<Rational>,
) -> Result<Certificate> {
    if reg.carrier() != m.carrier() {
        return Err(Error::CarrierMismatch { expected: m.carrier().to_string(), found: reg.carrier().to_string() });
    }
    let factor = factor.unwrap_or_else(|| k + int(1));
    let horizon = horizon_of(reg, phis, sequences.iter().map(Vec::len).max().unwrap_or(0));
    let tri = k_triangular_certificate(m, k, horizon, "m")?;
    if !tri.is_holds() {
        return Ok(hypothesis_failed(tri));
    }
    let sups = sup_table(reg, phis)?;
    let mut worst = 1;
    for (si, seq) in sequences.iter().enumerate() {
        validate_disjoint(m.algebra(), seq)?;
        let chain = tail_unions(seq);
        let live = nonempty_prefix(&chain);
        let chain_values: Vec<LatticeValue> = live.iter().map(|h| m.eval(*h)).collect();
        let hyp = decay_certificate(&chain_values, reg, phis, &sups)?;
        if !hyp.is_holds() {
            return Ok(hypothesis_failed(relabel(
                hyp,
                &format!("continuity along tail unions of sequence {}", si + 1),
                live,
            )));
        }
        for (phi, sup) in phis.iter().zip(&sups) {
            let n0 = first_stable_index(&chain_values, sup).unwrap_or(1);
            let bound = sup.scale(&factor);
            for h in n0..=seq.len() {
                let v = m.eval(seq[h - 1]);
                if !v.le(&bound) {
                    let witness = Witness::new(format!(
                        "m(C_h) <= {factor}·sup_t a(t, phi(t)) for h >= n0 (sequence {})",
                        si + 1
                    ))
                    .phi(phi.clone())
                    .indices(vec![n0, h])
                    .sets(vec![seq[h - 1]])
                    .values(vec![v, bound]);
                    return Ok(Certificate::violated(horizon, witness).with_regulator(&reg.scaled(&factor)));
                }
            }
            worst = worst.max(n0);
        }
    }
    let mut cert = Certificate::holds(horizon).with_regulator(&reg.scaled(&factor));
    cert.n0 = Some(worst);
    Ok(cert)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InheritedProperty {
    #[serde(rename = "S-BOUNDED")]
    SBounded,
    #[serde(rename = "CONTINUOUS")]
    Continuous,
}

/// For each component, a subset of `set` attaining that component of `v(m)(set)`.
fn component_argmax(values: &[LatticeValue], set: AtomSet) -> Vec<AtomSet> {
    let dims = values[0].components().len();
    (0..dims)
        .map(|d| {
            let mut best = AtomSet::EMPTY;
            for b in set.subsets() {
                if values[b.bits() as usize].components()[d] > values[best.bits() as usize].components()[d] {
                    best = b;
                }
            }
            best
        })
        .collect()
}

/// Checks that `v(m)` (or every `v(m_j)` uniformly) keeps the property of `m`.
///
/// S-BOUNDED: the hypothesis is checked along each sequence and along the
/// subsequences `B_h ⊂ C_h` attaining `v(m)(C_h)`; the conclusion uses the
/// same regulator. CONTINUOUS: the hypothesis is continuity along every chain
/// `(B ∩ H_n)_n` traced inside the tested chain (uniformly: the uniform
/// profile) plus k-triangularity; the conclusion uses `(k+1)·reg`.
#[allow(clippy::too_many_arguments)]
pub fn semivariation_inheritance_check(
    family: &SetFunctionFamily,
    property: InheritedProperty,
    scope: Scope,
    k: &Rational,
    reg: &Regulator,
    structures: &[Vec<AtomSet>],
    phis: &[IndexMap],
) -> Result<Certificate> {
    scope.check(family)?;
    check_regulator(family, reg)?;
    let tables = family.semivariation_tables()?;
    let sups = sup_table(reg, phis)?;
    let horizon = horizon_of(reg, phis, structures.iter().map(Vec::len).max().unwrap_or(0));
    let values: Vec<_> = family.members().iter().map(|m| m.values().map(|v| v.into_owned())).collect::<Result<_>>()?;
    let members: Vec<usize> = match scope {
        Scope::Member(j) => vec![j],
        Scope::Uniform => (1..=family.len()).collect(),
    };
    let mut hyps = Vec::new();
    let mut concl = Vec::new();
    match property {
        InheritedProperty::SBounded => {
            for (si, seq) in structures.iter().enumerate() {
                validate_disjoint(family.algebra(), seq)?;
                let ctx = format!("s-bounded along sequence {}", si + 1);
                let base = member_values(family, scope, seq);
                hyps.push(relabel(decay_certificate(&base, reg, phis, &sups)?, &ctx, seq));
                for &j in &members {
                    let traces: Vec<Vec<AtomSet>> = {
                        let per: Vec<Vec<AtomSet>> = seq.iter().map(|c| component_argmax(&values[j - 1], *c)).collect();
                        (0..per.first().map_or(0, Vec::len)).map(|d| per.iter().map(|p| p[d]).collect()).collect()
                    };
                    for trace in traces {
                        let vals = member_values(family, scope, &trace);
                        let ctx = format!("{ctx}, maximizing subsets of member {j}");
                        hyps.push(relabel(decay_certificate(&vals, reg, phis, &sups)?, &ctx, &trace));
                    }
                }
                let env = envelope_values(&tables, scope, seq);
                let ctx = format!("semivariation s-bounded along sequence {}", si + 1);
                concl.push(relabel(decay_certificate(&env, reg, phis, &sups)?, &ctx, seq));
            }
            let cert = combine(hyps, horizon, reg);
            if !cert.is_holds() {
                return Ok(hypothesis_failed(cert));
            }
            Ok(combine(concl, horizon, reg))
        }
        InheritedProperty::Continuous => {
            for &j in &members {
                let cert = k_triangular_certificate(family.member(j), k, horizon, &format!("member {j}"))?;
                if !cert.is_holds() {
                    return Ok(hypothesis_failed(cert));
                }
            }
            let scaled = reg.scaled(&(k + int(1)));
            let scaled_sups = sup_table(&scaled, phis)?;
            for (ci, chain) in structures.iter().enumerate() {
                validate_chain(family.algebra(), chain)?;
                let live = nonempty_prefix(chain);
                let ctx = format!("continuity along chain {}", ci + 1);
                match scope {
                    Scope::Member(j) => {
                        for b in chain[0].subsets() {
                            let traced: Vec<AtomSet> = live.iter().map(|h| h.intersection(b)).collect();
                            let traced = nonempty_prefix(&traced);
                            let vals = member_values(family, Scope::Member(j), traced);
                            let ctx = format!("{ctx} traced in {b}");
                            hyps.push(relabel(decay_certificate(&vals, reg, phis, &sups)?, &ctx, traced));
                        }
                    }
                    Scope::Uniform => {
                        let vals = envelope_values(&tables, scope, live);
                        hyps.push(relabel(decay_certificate(&vals, reg, phis, &sups)?, &ctx, live));
                    }
                }
                let env = envelope_values(&tables, scope, live);
                let ctx = format!("semivariation continuity along chain {}", ci + 1);
                concl.push(relabel(decay_certificate(&env, &scaled, phis, &scaled_sups)?, &ctx, live));
            }
            let cert = combine(hyps, horizon, reg);
            if !cert.is_holds() {
                return Ok(hypothesis_failed(cert));
            }
            Ok(combine(concl, horizon, &scaled))
        }
    }
}

/// Instance of the uniformity transfer: per-member decay of
/// `⋁_{A ⊂ H_n∖W} m_j(A)` plus uniform s-boundedness give uniform decay of
/// `⋁_j ⋁_{A ⊂ H_n∖W} m_j(A)`, all w.r.t. one regulator.
///
/// Uniform s-boundedness is checked along the difference sequence of
/// `(H_n∖W)` and along the singletons of `H_1∖W`.
pub fn uniformity_transfer_check(
    family: &SetFunctionFamily,
    chain: &[AtomSet],
    w: AtomSet,
    reg: &Regulator,
    phis: &[IndexMap],
) -> Result<Certificate> {
    check_regulator(family, reg)?;
    validate_decreasing(family.algebra(), chain)?;
    if let Some(i) = chain.iter().position(|h| !w.is_subset(*h)) {
        return Err(Error::NotContained { set: w, index: i + 1 });
    }
    let horizon = horizon_of(reg, phis, chain.len());
    let sups = sup_table(reg, phis)?;
    let tables = family.semivariation_tables()?;
    let rest: Vec<AtomSet> = chain.iter().map(|h| h.difference(w)).collect();
    let live = nonempty_prefix(&rest);

    let mut diffs: Vec<AtomSet> = rest.windows(2).map(|p| p[0].difference(p[1])).collect();
    diffs.push(*rest.last().expect("non-empty"));
    let singletons: Vec<AtomSet> = rest[0].atoms().map(AtomSet::singleton).collect();
    let mut hyps = Vec::new();
    for (name, seq) in [("difference sequence", &diffs), ("singletons", &singletons)] {
        let vals = member_values(family, Scope::Uniform, seq);
        let ctx = format!("uniform s-boundedness along the {name}");
        hyps.push(relabel(decay_certificate(&vals, reg, phis, &sups)?, &ctx, seq));
    }
    for j in 1..=family.len() {
        let vals = envelope_values(&tables, Scope::Member(j), live);
        let ctx = format!("decay of member {j} on H_n minus W");
        hyps.push(relabel(decay_certificate(&vals, reg, phis, &sups)?, &ctx, live));
    }
    let cert = combine(hyps, horizon, reg);
    if !cert.is_holds() {
        return Ok(hypothesis_failed(cert));
    }
    let vals = envelope_values(&tables, Scope::Uniform, live);
    Ok(relabel(decay_certificate(&vals, reg, phis, &sups)?, "uniform decay on H_n minus W", live))
}

/// τ-continuity modelled through a submeasure `η`: s-boundedness along the
/// given sequences plus decay of `m_j(H_n)` (uniformly `⋁_j m_j(H_n)`) along
/// `η`-null decreasing chains.
#[allow(clippy::too_many_arguments)]
pub fn tau_continuity_check(
    family: &SetFunctionFamily,
    eta: &Submeasure,
    chains: &[Vec<AtomSet>],
    sequences: &[Vec<AtomSet>],
    scope: Scope,
    reg: &Regulator,
    phis: &[IndexMap],
) -> Result<Certificate> {
    scope.check(family)?;
    check_regulator(family, reg)?;
    if eta.function().algebra() != family.algebra() {
        return Err(Error::DimensionMismatch("submeasure and family live on different algebras".into()));
    }
    let horizon = horizon_of(reg, phis, chains.iter().chain(sequences).map(Vec::len).max().unwrap_or(0));
    let sups = sup_table(reg, phis)?;
    let mut certs = Vec::new();
    for chain in chains {
        validate_decreasing(family.algebra(), chain)?;
        let last = *chain.last().expect("non-empty");
        let tail = eta.eval(last);
        if !tail.is_zero() {
            return Err(Error::NotTauNull(format!("η({last}) = {tail}")));
        }
    }
    for (si, seq) in sequences.iter().enumerate() {
        validate_disjoint(family.algebra(), seq)?;
        let vals = member_values(family, scope, seq);
        certs.push(relabel(
            decay_certificate(&vals, reg, phis, &sups)?,
            &format!("s-bounded along sequence {}", si + 1),
            seq,
        ));
    }
    for (ci, chain) in chains.iter().enumerate() {
        let live = nonempty_prefix(chain);
        let vals = member_values(family, scope, live);
        certs.push(relabel(
            decay_certificate(&vals, reg, phis, &sups)?,
            &format!("decay along null chain {}", ci + 1),
            live,
        ));
    }
    Ok(combine(certs, horizon, reg))
}
