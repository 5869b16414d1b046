//! Indexed families of set functions, submeasures, and validated set sequences.

use serde::{Deserialize, Serialize};

use crate::atoms::AtomSet;
use crate::error::{Error, Result};
use crate::lattice::regulator::Regulator;
use crate::lattice::value::{Carrier, LatticeValue, Rational};
use crate::setfun::{is_k_subadditive, is_monotone, semivariation_values, FiniteAlgebra, SetFunction};

/// `m_1..m_J` over one algebra, with an optional declared pointwise limit
/// `m_0` and the regulator for that convergence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FamilyRecord", into = "FamilyRecord")]
pub struct SetFunctionFamily {
    members: Vec<SetFunction>,
    limit: Option<SetFunction>,
    convergence_regulator: Option<Regulator>,
    equibound: LatticeValue,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyRecord {
    pub members: Vec<SetFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<SetFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence_regulator: Option<Regulator>,
}

impl TryFrom<FamilyRecord> for SetFunctionFamily {
    type Error = Error;
    fn try_from(r: FamilyRecord) -> Result<Self> {
        SetFunctionFamily::new(r.members, r.limit, r.convergence_regulator)
    }
}

impl From<SetFunctionFamily> for FamilyRecord {
    fn from(f: SetFunctionFamily) -> Self {
        FamilyRecord { members: f.members, limit: f.limit, convergence_regulator: f.convergence_regulator }
    }
}

impl SetFunctionFamily {
    pub fn new(
        members: Vec<SetFunction>,
        limit: Option<SetFunction>,
        convergence_regulator: Option<Regulator>,
    ) -> Result<Self> {
        let first = members.first().ok_or(Error::EmptyInput("family members"))?;
        let (algebra, carrier) = (first.algebra(), first.carrier());
        for m in members.iter().chain(&limit) {
            if m.algebra() != algebra {
                return Err(Error::DimensionMismatch(format!(
                    "member on {} atoms in a family on {}",
                    m.atoms(),
                    algebra.atoms()
                )));
            }
            if m.carrier() != carrier {
                return Err(Error::CarrierMismatch { expected: carrier.to_string(), found: m.carrier().to_string() });
            }
        }
        if let Some(reg) = &convergence_regulator {
            if reg.carrier() != carrier {
                return Err(Error::CarrierMismatch { expected: carrier.to_string(), found: reg.carrier().to_string() });
            }
        }
        let equibound = LatticeValue::join_all(members.iter().map(SetFunction::bound)).expect("non-empty");
        Ok(SetFunctionFamily { members, limit, convergence_regulator, equibound })
    }

    pub fn constant(m: SetFunction, copies: usize) -> Result<Self> {
        let reg = Regulator::zero(m.carrier(), 1, 1);
        Self::new(vec![m.clone(); copies.max(1)], Some(m), Some(reg))
    }

    pub fn members(&self) -> &[SetFunction] {
        &self.members
    }

    /// `m_j`, 1-based.
    pub fn member(&self, j: usize) -> &SetFunction {
        &self.members[j - 1]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn limit(&self) -> Option<&SetFunction> {
        self.limit.as_ref()
    }

    pub fn convergence_regulator(&self) -> Option<&Regulator> {
        self.convergence_regulator.as_ref()
    }

    pub fn algebra(&self) -> FiniteAlgebra {
        self.members[0].algebra()
    }

    pub fn carrier(&self) -> Carrier {
        self.members[0].carrier()
    }

    /// A common `u` with `m_j(A) <= u` for every `j` and `A`.
    pub fn equibound(&self) -> &LatticeValue {
        &self.equibound
    }

    /// `⋁_j v(m_j)(G)`: the exact equibound over the ground set.
    pub fn exact_equibound(&self) -> Result<LatticeValue> {
        let mut acc = LatticeValue::zero(self.carrier());
        for m in &self.members {
            for v in m.values()?.iter() {
                acc = acc.join(v);
            }
        }
        Ok(acc)
    }

    /// Semivariation tables of every member.
    pub fn semivariation_tables(&self) -> Result<Vec<Vec<LatticeValue>>> {
        self.members.iter().map(|m| Ok(semivariation_values(&m.values()?))).collect()
    }
}

/// Which quantity a profile tracks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scope {
    /// A single member `m_j` (1-based).
    Member(usize),
    /// The join over all members.
    Uniform,
}

impl Scope {
    pub fn is_uniform(self) -> bool {
        self == Scope::Uniform
    }

    pub(crate) fn check(self, family: &SetFunctionFamily) -> Result<()> {
        match self {
            Scope::Member(j) if j == 0 || j > family.len() => {
                Err(Error::DimensionMismatch(format!("member {j} outside 1..={}", family.len())))
            }
            _ => Ok(()),
        }
    }
}

/// A monotone, 1-subadditive scalar set function with `η(∅) = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SetFunction", into = "SetFunction")]
pub struct Submeasure(SetFunction);

impl TryFrom<SetFunction> for Submeasure {
    type Error = Error;
    fn try_from(f: SetFunction) -> Result<Self> {
        Submeasure::new(f)
    }
}

impl From<Submeasure> for SetFunction {
    fn from(s: Submeasure) -> Self {
        s.0
    }
}

impl Submeasure {
    pub fn new(f: SetFunction) -> Result<Self> {
        if f.carrier() != Carrier::Scalar {
            return Err(Error::NotTotallyOrdered);
        }
        if let Some(w) = is_monotone(&f)?.witness {
            return Err(Error::InvalidSetFunction(format!(
                "submeasure is not monotone at {} ⊂ {}",
                w.sets[0], w.sets[1]
            )));
        }
        if !is_k_subadditive(&f, &Rational::from_integer(1.into()))? {
            return Err(Error::InvalidSetFunction("submeasure is not subadditive".into()));
        }
        Ok(Submeasure(f))
    }

    /// `η(A) = |A| / n`.
    pub fn normalized_counting(n: usize) -> Result<Self> {
        let n_r = Rational::from_integer((n.max(1) as i64).into());
        Self::new(SetFunction::from_fn(n, |a| {
            LatticeValue::Scalar(Rational::from_integer((a.len() as i64).into()) / &n_r)
        })?)
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(SetFunction::zero(n, Carrier::Scalar)?)
    }

    pub fn eval(&self, set: AtomSet) -> LatticeValue {
        self.0.eval(set)
    }

    pub fn function(&self) -> &SetFunction {
        &self.0
    }
}

pub(crate) fn check_members(algebra: FiniteAlgebra, sets: &[AtomSet]) -> Result<()> {
    sets.iter().try_for_each(|s| algebra.check_member(*s))
}

/// Pairwise disjointness.
pub fn validate_disjoint(algebra: FiniteAlgebra, sets: &[AtomSet]) -> Result<()> {
    check_members(algebra, sets)?;
    let mut seen = AtomSet::EMPTY;
    for (i, s) in sets.iter().enumerate() {
        if !seen.is_disjoint(*s) {
            let other = sets[..i].iter().find(|p| !p.is_disjoint(*s)).expect("overlap exists");
            return Err(Error::NotDisjoint { first: *other, second: *s });
        }
        seen = seen.union(*s);
    }
    Ok(())
}

/// `H_1 ⊇ H_2 ⊇ …` (not necessarily strictly).
pub fn validate_decreasing(algebra: FiniteAlgebra, chain: &[AtomSet]) -> Result<()> {
    if chain.is_empty() {
        return Err(Error::EmptyInput("chain"));
    }
    check_members(algebra, chain)?;
    for (i, w) in chain.windows(2).enumerate() {
        if !w[1].is_subset(w[0]) {
            return Err(Error::NotDecreasing { index: i + 2 });
        }
    }
    Ok(())
}

/// Decreasing with empty intersection: in a finite algebra the chain must reach `∅`.
pub fn validate_chain(algebra: FiniteAlgebra, chain: &[AtomSet]) -> Result<()> {
    validate_decreasing(algebra, chain)?;
    let last = *chain.last().expect("non-empty");
    if !last.is_empty() {
        return Err(Error::NonEmptyIntersection(last));
    }
    Ok(())
}

/// `{from..n}, {from+1..n}, …, {n}, ∅`.
pub fn tail_chain(from: usize, n: usize) -> Vec<AtomSet> {
    let mut chain: Vec<AtomSet> = (from.max(1)..=n).map(|h| AtomSet::interval(h, n)).collect();
    chain.push(AtomSet::EMPTY);
    chain
}

/// `⋃_{i≥h} C_i` for each `h`, followed by `∅`.
pub fn tail_unions(sets: &[AtomSet]) -> Vec<AtomSet> {
    let mut out = vec![AtomSet::EMPTY; sets.len() + 1];
    for h in (0..sets.len()).rev() {
        out[h] = out[h + 1].union(sets[h]);
    }
    out
}

/// The members of a chain before its trailing `∅` run; these carry the decay.
pub(crate) fn nonempty_prefix(chain: &[AtomSet]) -> &[AtomSet] {
    let end = chain.iter().rposition(|s| !s.is_empty()).map_or(0, |p| p + 1);
    &chain[..end]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::value::rat;
    use crate::setfun::WeightRule;

    #[test]
    fn chain_validation() {
        let alg = FiniteAlgebra::new(4).unwrap();
        let chain = tail_chain(1, 4);
        assert_eq!(chain.len(), 5);
        assert!(validate_chain(alg, &chain).is_ok());
        assert!(matches!(validate_chain(alg, &chain[..4]), Err(Error::NonEmptyIntersection(_))));
        let bad = [AtomSet::interval(2, 4), AtomSet::interval(1, 4)];
        assert!(matches!(validate_decreasing(alg, &bad), Err(Error::NotDecreasing { index: 2 })));
        assert_eq!(nonempty_prefix(&chain).len(), 4);
        assert!(nonempty_prefix(&[AtomSet::EMPTY]).is_empty());
    }

    #[test]
    fn disjoint_validation() {
        let alg = FiniteAlgebra::new(4).unwrap();
        let s = |a: &[usize]| AtomSet::from_atoms(a.iter().copied()).unwrap();
        assert!(validate_disjoint(alg, &[s(&[1]), s(&[2, 3])]).is_ok());
        assert!(matches!(validate_disjoint(alg, &[s(&[1, 2]), s(&[2])]), Err(Error::NotDisjoint { .. })));
        assert_eq!(tail_unions(&[s(&[1]), s(&[3]), s(&[2])]), vec![s(&[1, 2, 3]), s(&[2, 3]), s(&[2]), AtomSet::EMPTY]);
    }

    #[test]
    fn submeasures() {
        assert!(Submeasure::normalized_counting(5).is_ok());
        assert!(Submeasure::zero(3).is_ok());
        let m = SetFunction::from_rule(&WeightRule::AlternatingPower { p: 2 }, 3).unwrap();
        assert!(Submeasure::new(m.clone()).is_err());
        let v = crate::setfun::semivariation(&m).unwrap();
        assert!(Submeasure::new(v).is_ok());
    }

    #[test]
    fn family_equibound_and_roundtrip() {
        let m = SetFunction::from_rule(&WeightRule::AlternatingPower { p: 2 }, 3).unwrap();
        let fam = SetFunctionFamily::new(vec![m.clone(), m.scaled(&rat(2, 1)).unwrap()], Some(m), None).unwrap();
        assert_eq!(fam.exact_equibound().unwrap(), LatticeValue::Scalar(rat(20, 9)));
        assert!(fam.exact_equibound().unwrap().le(fam.equibound()));
        let json = serde_json::to_string(&fam).unwrap();
        let back: SetFunctionFamily = serde_json::from_str(&json).unwrap();
        assert_eq!(back, fam);
        let other = SetFunction::zero(4, Carrier::Scalar).unwrap();
        assert!(SetFunctionFamily::new(vec![other, fam.member(1).clone()], None, None).is_err());
    }
}
