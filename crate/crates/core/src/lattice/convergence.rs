//! (D)-convergence at a finite horizon, certificates, and the subsequence principle.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::regulator::{regulator_sup, IndexMap, Regulator};
use super::value::LatticeValue;
use crate::atoms::AtomSet;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "HOLDS-AT-HORIZON")]
    HoldsAtHorizon,
    #[serde(rename = "VIOLATED")]
    Violated,
    #[serde(rename = "HYPOTHESIS-NOT-MET")]
    HypothesisNotMet,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self == Verdict::HoldsAtHorizon
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::HoldsAtHorizon => "HOLDS-AT-HORIZON",
            Verdict::Violated => "VIOLATED",
            Verdict::HypothesisNotMet => "HYPOTHESIS-NOT-MET",
        })
    }
}

/// Data reproducing a failed inequality. `label` names the inequality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<IndexMap>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub indices: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sets: Vec<AtomSet>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<LatticeValue>,
}

impl Witness {
    pub fn new(label: impl Into<String>) -> Self {
        Witness { label: label.into(), ..Default::default() }
    }

    pub fn phi(mut self, phi: IndexMap) -> Self {
        self.phi = Some(phi);
        self
    }

    pub fn indices(mut self, indices: Vec<usize>) -> Self {
        self.indices = indices;
        self
    }

    pub fn sets(mut self, sets: Vec<AtomSet>) -> Self {
        self.sets = sets;
        self
    }

    pub fn values(mut self, values: Vec<LatticeValue>) -> Self {
        self.values = values;
        self
    }
}

/// Truncation levels a certificate was computed at.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Horizon {
    pub rows: usize,
    pub cols: usize,
    pub length: usize,
    pub phi_samples: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regulator: Option<Regulator>,
    pub horizon: Horizon,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Largest `n₀` needed over the sampled maps, when the check holds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0: Option<usize>,
}

impl Certificate {
    pub fn holds(horizon: Horizon) -> Self {
        Certificate { verdict: Verdict::HoldsAtHorizon, witness: None, regulator: None, horizon, seed: None, n0: None }
    }

    pub fn violated(horizon: Horizon, witness: Witness) -> Self {
        Certificate {
            verdict: Verdict::Violated,
            witness: Some(witness),
            regulator: None,
            horizon,
            seed: None,
            n0: None,
        }
    }

    pub fn hypothesis_not_met(horizon: Horizon, witness: Witness) -> Self {
        Certificate { verdict: Verdict::HypothesisNotMet, ..Certificate::violated(horizon, witness) }
    }

    pub fn with_regulator(mut self, reg: &Regulator) -> Self {
        self.regulator = Some(reg.clone());
        self
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn is_holds(&self) -> bool {
        self.verdict.holds()
    }
}

/// `⋁_t a_{t,φ(t)}` for each sampled map, computed once.
pub fn sup_table(reg: &Regulator, phis: &[IndexMap]) -> Result<Vec<LatticeValue>> {
    phis.iter().map(|phi| regulator_sup(reg, phi)).collect()
}

/// Smallest `n₀` (1-based) with `deviations[m] <= bound` for every `m >= n₀`,
/// or `None` when the last term already fails.
pub fn first_stable_index(deviations: &[LatticeValue], bound: &LatticeValue) -> Option<usize> {
    let mut n0 = deviations.len() + 1;
    for (i, d) in deviations.iter().enumerate().rev() {
        if d.le(bound) {
            n0 = i + 1;
        } else {
            break;
        }
    }
    (n0 <= deviations.len()).then_some(n0)
}

/// Checks `|seq[n] - limit| <= ⋁_t a_{t,φ(t)}` eventually along the sequence,
/// for every sampled `φ`.
pub fn d_converges(
    seq: &[LatticeValue],
    limit: &LatticeValue,
    reg: &Regulator,
    phis: &[IndexMap],
) -> Result<Certificate> {
    let sups = sup_table(reg, phis)?;
    d_converges_with_sups(seq, limit, reg, phis, &sups)
}

pub(crate) fn deviations(seq: &[LatticeValue], limit: &LatticeValue, reg: &Regulator) -> Result<Vec<LatticeValue>> {
    if seq.is_empty() {
        return Err(Error::EmptyInput("sequence"));
    }
    limit.check_carrier(reg.carrier())?;
    seq.iter()
        .map(|x| {
            x.check_carrier(reg.carrier())?;
            Ok((x - limit).abs())
        })
        .collect()
}

/// As [`d_converges`] with the suprema table precomputed (one entry per map).
pub fn d_converges_with_sups(
    seq: &[LatticeValue],
    limit: &LatticeValue,
    reg: &Regulator,
    phis: &[IndexMap],
    sups: &[LatticeValue],
) -> Result<Certificate> {
    let devs = deviations(seq, limit, reg)?;
    let horizon = Horizon { rows: reg.rows(), cols: reg.cols(), length: seq.len(), phi_samples: phis.len() };
    let mut worst = 1;
    for (phi, sup) in phis.iter().zip(sups) {
        match first_stable_index(&devs, sup) {
            Some(n0) => worst = worst.max(n0),
            None => {
                let failing: Vec<usize> = (1..=devs.len()).filter(|&n| !devs[n - 1].le(sup)).collect();
                let last = *failing.last().expect("last term fails");
                let witness = Witness::new("|x_n - x| <= sup_t a(t, phi(t))")
                    .phi(phi.clone())
                    .indices(failing)
                    .values(vec![devs[last - 1].clone(), sup.clone()]);
                return Ok(Certificate::violated(horizon, witness).with_regulator(reg));
            }
        }
    }
    let mut cert = Certificate::holds(horizon).with_regulator(reg);
    cert.n0 = Some(worst);
    Ok(cert)
}

/// Which subsequences the principle is tested on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubsequenceSelector {
    /// Every strictly increasing index list of at least this length.
    AllOfMinLen(usize),
    /// Caller-supplied 1-based index lists.
    Explicit(Vec<Vec<usize>>),
}

/// Largest sequence for which [`SubsequenceSelector::AllOfMinLen`] enumerates exhaustively.
pub const MAX_SUBSEQUENCE_HORIZON: usize = 20;

/// At a finite horizon a sub-subsequence "tends to infinity" when it keeps the
/// last index of its subsequence, so a subsequence has a (D)-convergent
/// sub-subsequence exactly when that last term meets every sampled bound.
///
/// Returns HOLDS when every selected subsequence has one (and then the whole
/// sequence converges); otherwise VIOLATED with a subsequence lacking one.
pub fn subsequence_principle_check(
    seq: &[LatticeValue],
    limit: &LatticeValue,
    reg: &Regulator,
    selector: &SubsequenceSelector,
    phis: &[IndexMap],
) -> Result<Certificate> {
    let devs = deviations(seq, limit, reg)?;
    let sups = sup_table(reg, phis)?;
    let p = seq.len();
    let bad_at = |n: usize| sups.iter().position(|s| !devs[n - 1].le(s));
    let horizon = Horizon { rows: reg.rows(), cols: reg.cols(), length: p, phi_samples: phis.len() };

    let bad: Vec<usize> = (1..=p).filter(|&n| bad_at(n).is_some()).collect();
    let failing: Option<Vec<usize>> = match selector {
        SubsequenceSelector::AllOfMinLen(k) => {
            if p > MAX_SUBSEQUENCE_HORIZON {
                return Err(Error::TooLarge { what: "subsequence horizon", n: p, max: MAX_SUBSEQUENCE_HORIZON });
            }
            let k = (*k).max(1);
            if bad.len() >= k {
                Some(bad.clone())
            } else {
                // a selectable subsequence ending at a bad index, padded with the earliest indices
                bad.iter().copied().find(|&last| last >= k).map(|last| {
                    let mut idx: Vec<usize> = (1..last).filter(|i| !bad.contains(i)).take(k - 1).collect();
                    idx.extend(bad.iter().copied().filter(|&b| b <= last));
                    idx.sort_unstable();
                    let drop = idx.len() - k;
                    idx.drain(..drop);
                    idx
                })
            }
        }
        SubsequenceSelector::Explicit(lists) => {
            for list in lists {
                if list.is_empty() || list.windows(2).any(|w| w[0] >= w[1]) || list[list.len() - 1] > p || list[0] == 0
                {
                    return Err(Error::InvalidSequence(format!("not a subsequence of 1..={p}: {list:?}")));
                }
            }
            lists.iter().find(|list| bad_at(*list.last().expect("non-empty")).is_some()).cloned()
        }
    };

    match failing {
        None => {
            let full = d_converges_with_sups(seq, limit, reg, phis, &sups)?;
            Ok(Certificate { n0: full.n0, ..Certificate::holds(horizon).with_regulator(reg) })
        }
        Some(indices) => {
            let last = *indices.last().expect("non-empty");
            let which = bad_at(last).expect("last index fails");
            let witness = Witness::new("subsequence without a (D)-convergent sub-subsequence")
                .phi(phis[which].clone())
                .values(indices.iter().map(|&n| devs[n - 1].clone()).collect())
                .indices(indices);
            Ok(Certificate::violated(horizon, witness).with_regulator(reg))
        }
    }
}

/// `⋀_φ ⋁_t a_{t,φ(t)}` over the sampled maps: a demonstration estimate of
/// weak σ-distributivity, which holds exactly for the supported carriers.
pub fn weak_distributivity_estimate(reg: &Regulator, phis: &[IndexMap]) -> Result<LatticeValue> {
    let sups = sup_table(reg, phis)?;
    sups.into_iter().reduce(|a, b| a.meet(&b)).ok_or(Error::EmptyInput("index maps"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::phi::PhiSampler;
    use crate::lattice::value::rat;
    use proptest::prelude::*;

    fn s(n: i64, d: i64) -> LatticeValue {
        LatticeValue::Scalar(rat(n, d))
    }

    fn harmonic(rows: usize, cols: usize) -> Regulator {
        Regulator::from_rule(rows, cols, |_, l| s(1, l as i64)).unwrap()
    }

    #[test]
    fn constant_sequence_converges_immediately() {
        let reg = harmonic(4, 4);
        let phis = PhiSampler::new(4, 4, 3).with_random(20).sample();
        let cert = d_converges(&vec![s(2, 3); 6], &s(2, 3), &reg, &phis).unwrap();
        assert_eq!(cert.verdict, Verdict::HoldsAtHorizon);
        assert_eq!(cert.n0, Some(1));
    }

    #[test]
    fn harmonic_sequence_converges() {
        let cols = 8;
        let reg = harmonic(4, cols);
        let seq: Vec<_> = (1..=12).map(|n| s(1, n)).collect();
        let phis = PhiSampler::new(4, cols, 3).with_random(50).sample();
        let cert = d_converges(&seq, &s(0, 1), &reg, &phis).unwrap();
        assert!(cert.is_holds());
        // the bound is 1/max φ, reached once n >= max φ
        for phi in &phis {
            let sup = regulator_sup(&reg, phi).unwrap();
            let devs: Vec<_> = seq.clone();
            let n0 = first_stable_index(&devs, &sup).unwrap();
            assert!(n0 <= phi.values()[..4].iter().max().copied().unwrap());
        }
    }

    #[test]
    fn constant_one_does_not_converge_to_zero() {
        let reg = harmonic(3, 4);
        let phi = IndexMap::constant(3, 2);
        let cert = d_converges(&vec![s(1, 1); 5], &s(0, 1), &reg, std::slice::from_ref(&phi)).unwrap();
        assert_eq!(cert.verdict, Verdict::Violated);
        let w = cert.witness.unwrap();
        assert_eq!(w.phi, Some(phi));
        assert_eq!(w.indices, vec![1, 2, 3, 4, 5]);
        assert!(!w.values[0].le(&w.values[1]));
    }

    #[test]
    fn empty_sequence_rejected() {
        let reg = harmonic(1, 1);
        assert!(d_converges(&[], &s(0, 1), &reg, &[IndexMap::constant(1, 1)]).is_err());
    }

    fn alternating(p: usize) -> Vec<LatticeValue> {
        (1..=p).map(|n| s((n % 2 == 0) as i64, 1)).collect()
    }

    /// A subsequence has a convergent sub-subsequence containing its last index
    /// iff some subset ending there passes `d_converges`; search them all.
    fn brute_has_convergent_subsub(seq: &[LatticeValue], sub: &[usize], reg: &Regulator, phis: &[IndexMap]) -> bool {
        let last = *sub.last().unwrap();
        let rest = &sub[..sub.len() - 1];
        (0u32..1 << rest.len()).any(|mask| {
            let mut picked: Vec<LatticeValue> =
                rest.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &n)| seq[n - 1].clone()).collect();
            picked.push(seq[last - 1].clone());
            d_converges(&picked, &s(0, 1), reg, phis).unwrap().is_holds()
        })
    }

    #[test]
    fn alternating_sequence_violates_with_odd_subsequence() {
        let reg = harmonic(3, 4);
        let phis = PhiSampler::new(3, 4, 1).with_random(10).sample();
        let seq = alternating(8);
        let cert =
            subsequence_principle_check(&seq, &s(0, 1), &reg, &SubsequenceSelector::AllOfMinLen(3), &phis).unwrap();
        assert_eq!(cert.verdict, Verdict::Violated);
        let w = cert.witness.unwrap();
        // the ones sit at 1-based even positions (odd 0-based offsets)
        assert_eq!(w.indices, vec![2, 4, 6, 8]);
        assert!(!brute_has_convergent_subsub(&seq, &w.indices, &reg, &phis));

        // oracle: enumerate all subsequences of length >= 3
        let found_bad = (0u32..1 << 8).filter(|m| m.count_ones() >= 3).any(|m| {
            let sub: Vec<usize> = (1..=8).filter(|i| m >> (i - 1) & 1 == 1).collect();
            !brute_has_convergent_subsub(&seq, &sub, &reg, &phis)
        });
        assert!(found_bad);
    }

    #[test]
    fn convergent_and_constant_hold() {
        let reg = harmonic(3, 8);
        let phis = PhiSampler::new(3, 8, 1).with_random(10).sample();
        let seq: Vec<_> = (1..=8).map(|n| s(1, n)).collect();
        let sel = SubsequenceSelector::AllOfMinLen(3);
        // 1/n only meets 1/8 at n = 8, so the subsequence principle must fail on early endings
        let early = subsequence_principle_check(&seq, &s(0, 1), &reg, &sel, &phis).unwrap();
        assert_eq!(early.verdict, Verdict::Violated);
        let tail = SubsequenceSelector::Explicit(vec![vec![2, 5, 8], vec![8]]);
        assert!(subsequence_principle_check(&seq, &s(0, 1), &reg, &tail, &phis).unwrap().is_holds());
        let constant = subsequence_principle_check(&vec![s(1, 2); 8], &s(1, 2), &reg, &sel, &phis).unwrap();
        assert!(constant.is_holds());
    }

    #[test]
    fn explicit_selector_validated() {
        let reg = harmonic(1, 1);
        let sel = SubsequenceSelector::Explicit(vec![vec![3, 2]]);
        assert!(
            subsequence_principle_check(&vec![s(0, 1); 4], &s(0, 1), &reg, &sel, &[IndexMap::constant(1, 1)]).is_err()
        );
    }

    #[test]
    fn weak_distributivity_estimate_reaches_last_column() {
        let reg = harmonic(3, 5);
        let phis = PhiSampler::new(3, 5, 0).with_random(0).sample();
        assert_eq!(weak_distributivity_estimate(&reg, &phis).unwrap(), s(1, 5));
    }

    fn small_seq() -> impl Strategy<Value = Vec<LatticeValue>> {
        prop::collection::vec((0i64..6, 1i64..6).prop_map(|(n, d)| s(n, d)), 1..10)
    }

    proptest! {
        #[test]
        fn sup_is_antitone_in_phi(
            entries in prop::collection::vec(prop::collection::vec(0i64..20, 5), 4),
            phi in prop::collection::vec(1usize..=5, 4),
            bump in prop::collection::vec(0usize..3, 4),
        ) {
            let rows = entries.into_iter().map(|mut r| { r.sort_unstable_by(|a, b| b.cmp(a)); r.into_iter().map(|x| s(x, 3)).collect() }).collect();
            let reg = Regulator::new(rows).unwrap();
            let psi: Vec<usize> = phi.iter().zip(&bump).map(|(a, b)| (a + b).min(5)).collect();
            let lo = regulator_sup(&reg, &IndexMap::new(phi).unwrap()).unwrap();
            let hi = regulator_sup(&reg, &IndexMap::new(psi).unwrap()).unwrap();
            prop_assert!(hi.le(&lo));
        }

        #[test]
        fn o_sequence_regulator_dominates_first_term(
            mut sigma in prop::collection::vec(0i64..30, 1..=6),
            phi in prop::collection::vec(1usize..=6, 1..=6),
        ) {
            sigma.sort_unstable_by(|a, b| b.cmp(a));
            let cols = sigma.len();
            let seq = crate::lattice::OSequence::new(sigma.iter().map(|&x| s(x, 7)).collect()).unwrap();
            let reg = crate::lattice::regulator_from_o_sequence(&seq, phi.len());
            let phi = IndexMap::new(phi.into_iter().map(|l| l.min(cols)).collect()).unwrap();
            prop_assert!(seq.term(phi.at(1)).le(&regulator_sup(&reg, &phi).unwrap()));
        }

        #[test]
        fn convergence_is_subsequence_stable(seq in small_seq(), picks in prop::collection::vec(any::<bool>(), 10)) {
            let reg = harmonic(3, 4);
            let phis = PhiSampler::new(3, 4, 7).with_random(8).sample();
            let limit = s(0, 1);
            if d_converges(&seq, &limit, &reg, &phis).unwrap().is_holds() {
                let mut sub: Vec<LatticeValue> = seq.iter().zip(&picks).filter(|(_, &p)| p).map(|(x, _)| x.clone()).collect();
                sub.push(seq.last().unwrap().clone());
                prop_assert!(d_converges(&sub, &limit, &reg, &phis).unwrap().is_holds());
            }
        }

        #[test]
        fn converse_bounds_targets(
            entries in prop::collection::vec(prop::collection::vec(0i64..20, 6), 3),
        ) {
            let rows = entries.into_iter().map(|mut r| { r.sort_unstable_by(|a, b| b.cmp(a)); r[5] = 0; r.into_iter().map(|x| s(x, 4)).collect() }).collect();
            let reg = Regulator::new(rows).unwrap();
            let targets = [s(2, 1), s(1, 1), s(1, 2), s(0, 1)];
            let levels = crate::lattice::o_sequence_from_regulator(&reg, &targets).unwrap();
            for (lvl, t) in levels.iter().zip(&targets) {
                prop_assert!(regulator_sup(&reg, &lvl.phi).unwrap().le(&lvl.sigma));
                prop_assert!(lvl.sigma.le(t));
            }
        }
    }
}
