//! Finite power-set algebras and set functions on them.

use std::borrow::Cow;
use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::weights::WeightRule;
use crate::atoms::{AtomSet, MAX_ATOMS};
use crate::error::{Error, Result};
use crate::lattice::value::{rational_vec_serde, Carrier, LatticeValue, Rational};

/// Largest ground set for which a full value table is materialized.
pub const MAX_TABLE_ATOMS: usize = 20;

/// The power set of `{1..n}`; closed under all Boolean operations, so every
/// disjoint sequence generates a sub-σ-algebra inside it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteAlgebra {
    n: usize,
}

impl FiniteAlgebra {
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_ATOMS {
            return Err(Error::TooLarge { what: "atoms", n, max: MAX_ATOMS });
        }
        Ok(FiniteAlgebra { n })
    }

    pub fn atoms(&self) -> usize {
        self.n
    }

    pub fn ground(&self) -> AtomSet {
        AtomSet::full(self.n)
    }

    pub fn size(&self) -> usize {
        1 << self.n
    }

    /// Every member set in ascending bitmask order.
    pub fn members(&self) -> impl Iterator<Item = AtomSet> {
        (0..(1u32 << self.n)).map(AtomSet)
    }

    pub fn contains(&self, set: AtomSet) -> bool {
        set.is_subset(self.ground())
    }

    pub fn complement(&self, set: AtomSet) -> AtomSet {
        self.ground().difference(set)
    }

    pub fn check_member(&self, set: AtomSet) -> Result<()> {
        if self.contains(set) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!("{set} is not a subset of {{1..{}}}", self.n)))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Backing {
    /// Values indexed by bitmask.
    Table(Vec<LatticeValue>),
    /// `A ↦ |Σ_{a∈A} w_a|`, optionally generated by a closed-form rule.
    Series { weights: Vec<Rational>, rule: Option<WeightRule> },
    /// The semivariation of the inner function, evaluated on demand.
    Envelope(Box<SetFunction>),
}

/// A non-negative bounded set function with `m(∅) = 0` on a power set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetFunction {
    algebra: FiniteAlgebra,
    carrier: Carrier,
    backing: Backing,
    bound: LatticeValue,
}

impl SetFunction {
    /// From a full table indexed by bitmask; the bound is the join of the table.
    pub fn from_table(n: usize, values: Vec<LatticeValue>) -> Result<Self> {
        let algebra = FiniteAlgebra::new(n)?;
        if n > MAX_TABLE_ATOMS {
            return Err(Error::TooLarge { what: "table atoms", n, max: MAX_TABLE_ATOMS });
        }
        if values.len() != algebra.size() {
            return Err(Error::DimensionMismatch(format!(
                "table for {n} atoms needs {} values, got {}",
                algebra.size(),
                values.len()
            )));
        }
        let carrier = values[0].carrier();
        for (mask, v) in values.iter().enumerate() {
            v.check_carrier(carrier)?;
            if !v.is_nonnegative() {
                return Err(Error::InvalidSetFunction(format!("m({}) = {v} is negative", AtomSet(mask as u32))));
            }
        }
        if !values[0].is_zero() {
            return Err(Error::InvalidSetFunction(format!("m(∅) = {} is not zero", values[0])));
        }
        let bound = LatticeValue::join_all(&values).expect("non-empty");
        Ok(SetFunction { algebra, carrier, backing: Backing::Table(values), bound })
    }

    pub fn from_fn(n: usize, f: impl Fn(AtomSet) -> LatticeValue) -> Result<Self> {
        let algebra = FiniteAlgebra::new(n)?;
        Self::from_table(n, algebra.members().map(f).collect())
    }

    pub fn zero(n: usize, carrier: Carrier) -> Result<Self> {
        Self::from_fn(n, |_| LatticeValue::zero(carrier))
    }

    /// `A ↦ |Σ_{a∈A} weights[a]|` on `{1..n}`; the bound is `Σ |w_a|`.
    pub fn from_series(weights: Vec<Rational>, n: usize, rule: Option<WeightRule>) -> Result<Self> {
        let algebra = FiniteAlgebra::new(n)?;
        if weights.len() < n {
            return Err(Error::DimensionMismatch(format!("{} weights for {n} atoms", weights.len())));
        }
        let mut weights = weights;
        weights.truncate(n);
        let bound = weights.iter().fold(Rational::zero(), |acc, w| acc + w.abs());
        Ok(SetFunction {
            algebra,
            carrier: Carrier::Scalar,
            backing: Backing::Series { weights, rule },
            bound: LatticeValue::Scalar(bound),
        })
    }

    pub fn from_rule(rule: &WeightRule, n: usize) -> Result<Self> {
        Self::from_series(rule.weights(n), n, Some(rule.clone()))
    }

    pub(crate) fn envelope(inner: SetFunction) -> SetFunction {
        SetFunction {
            algebra: inner.algebra,
            carrier: inner.carrier,
            bound: inner.bound.clone(),
            backing: Backing::Envelope(Box::new(inner)),
        }
    }

    pub fn algebra(&self) -> FiniteAlgebra {
        self.algebra
    }

    pub fn atoms(&self) -> usize {
        self.algebra.atoms()
    }

    pub fn carrier(&self) -> Carrier {
        self.carrier
    }

    pub fn backing(&self) -> &Backing {
        &self.backing
    }

    /// A common upper bound for all values.
    pub fn bound(&self) -> &LatticeValue {
        &self.bound
    }

    pub fn tail_rule(&self) -> Option<&WeightRule> {
        match &self.backing {
            Backing::Series { rule, .. } => rule.as_ref(),
            Backing::Envelope(inner) => inner.tail_rule(),
            Backing::Table(_) => None,
        }
    }

    /// `m(A)`; atoms outside the ground set are ignored.
    pub fn eval(&self, set: AtomSet) -> LatticeValue {
        let set = set.intersection(self.algebra.ground());
        match &self.backing {
            Backing::Table(values) => values[set.bits() as usize].clone(),
            Backing::Series { weights, .. } => {
                let sum = set.atoms().fold(Rational::zero(), |acc, a| acc + &weights[a - 1]);
                LatticeValue::Scalar(sum.abs())
            }
            Backing::Envelope(inner) => {
                LatticeValue::join_all(&set.subsets().map(|b| inner.eval(b)).collect::<Vec<_>>())
                    .expect("at least the empty set")
            }
        }
    }

    /// All values in bitmask order.
    pub fn values(&self) -> Result<Cow<'_, [LatticeValue]>> {
        let n = self.atoms();
        if n > MAX_TABLE_ATOMS {
            return Err(Error::TooLarge { what: "table atoms", n, max: MAX_TABLE_ATOMS });
        }
        Ok(match &self.backing {
            Backing::Table(values) => Cow::Borrowed(values),
            Backing::Series { weights, .. } => {
                // signed partial sums by peeling the lowest atom
                let size = 1usize << n;
                let mut sums = vec![Rational::zero(); size];
                for mask in 1..size {
                    let low = mask.trailing_zeros() as usize;
                    sums[mask] = &sums[mask & (mask - 1)] + &weights[low];
                }
                Cow::Owned(sums.into_iter().map(|s| LatticeValue::Scalar(s.abs())).collect())
            }
            Backing::Envelope(inner) => Cow::Owned(super::semivariation::semivariation_values(&inner.values()?)),
        })
    }

    /// Materializes into an explicit table.
    pub fn to_table(&self) -> Result<SetFunction> {
        Self::from_table(self.atoms(), self.values()?.into_owned())
    }

    /// `c · m` for `c >= 0`; series stay series-backed.
    pub fn scaled(&self, c: &Rational) -> Result<SetFunction> {
        if c.is_negative() {
            return Err(Error::InvalidSetFunction(format!("negative scale {c}")));
        }
        let backing = match &self.backing {
            Backing::Table(values) => Backing::Table(values.iter().map(|v| v.scale(c)).collect()),
            Backing::Series { weights, .. } => {
                Backing::Series { weights: weights.iter().map(|w| w * c).collect(), rule: None }
            }
            Backing::Envelope(inner) => Backing::Envelope(Box::new(inner.scaled(c)?)),
        };
        Ok(SetFunction { algebra: self.algebra, carrier: self.carrier, backing, bound: self.bound.scale(c) })
    }

    pub fn is_zero_function(&self) -> Result<bool> {
        Ok(self.values()?.iter().all(LatticeValue::is_zero))
    }
}

/// On-disk form: `{atoms, backing, table | weights, tail}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetFunctionRecord {
    pub atoms: usize,
    pub backing: String,
    /// Keys are atom lists such as `{1,3}` (or raw bitmasks); missing sets are zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<BTreeMap<String, LatticeValue>>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_rational_vec")]
    pub weights: Option<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<WeightRule>,
    /// Vector dimension for tables whose listed values are all omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
}

mod opt_rational_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Vec<Rational>>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(v) => rational_vec_serde::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<Rational>>, D::Error> {
        rational_vec_serde::deserialize(d).map(Some)
    }
}

fn parse_set_key(key: &str) -> Result<AtomSet> {
    match key.trim().parse::<u32>() {
        Ok(bits) => Ok(AtomSet(bits)),
        Err(_) => key.parse(),
    }
}

impl SetFunction {
    pub fn to_record(&self) -> Result<SetFunctionRecord> {
        let atoms = self.atoms();
        Ok(match &self.backing {
            Backing::Series { weights, rule } => SetFunctionRecord {
                atoms,
                backing: "series".into(),
                table: None,
                weights: Some(weights.clone()),
                tail: rule.clone(),
                dimension: None,
            },
            _ => {
                let table = self
                    .values()?
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(mask, v)| (AtomSet(mask as u32).to_string(), v.clone()))
                    .collect();
                SetFunctionRecord {
                    atoms,
                    backing: "table".into(),
                    table: Some(table),
                    weights: None,
                    tail: None,
                    dimension: match self.carrier {
                        Carrier::Vector(d) => Some(d),
                        Carrier::Scalar => None,
                    },
                }
            }
        })
    }

    pub fn from_record(record: &SetFunctionRecord) -> Result<Self> {
        let n = record.atoms;
        match record.backing.as_str() {
            "series" => {
                let weights = match (&record.weights, &record.tail) {
                    (Some(w), _) => w.clone(),
                    (None, Some(rule)) => rule.weights(n),
                    (None, None) => return Err(Error::Fixture("series record needs weights or a tail rule".into())),
                };
                SetFunction::from_series(weights, n, record.tail.clone())
            }
            "table" => {
                let algebra = FiniteAlgebra::new(n)?;
                let table = record.table.clone().unwrap_or_default();
                let carrier = match (table.values().next(), record.dimension) {
                    (Some(v), _) => v.carrier(),
                    (None, Some(d)) => Carrier::Vector(d),
                    (None, None) => Carrier::Scalar,
                };
                if n > MAX_TABLE_ATOMS {
                    return Err(Error::TooLarge { what: "table atoms", n, max: MAX_TABLE_ATOMS });
                }
                let mut values = vec![LatticeValue::zero(carrier); algebra.size()];
                for (key, v) in &table {
                    let set = parse_set_key(key)?;
                    algebra.check_member(set)?;
                    values[set.bits() as usize] = v.clone();
                }
                SetFunction::from_table(n, values)
            }
            other => Err(Error::Fixture(format!("unknown backing {other:?}"))),
        }
    }
}

impl Serialize for SetFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_record().map_err(serde::ser::Error::custom)?.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SetFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let record = SetFunctionRecord::deserialize(d)?;
        SetFunction::from_record(&record).map_err(serde::de::Error::custom)
    }
}

/// `A ↦ |Σ_{a∈A} weights[a]|` on `{1..n}`.
pub fn make_series_setfunction(weights: &[Rational], n: usize) -> Result<SetFunction> {
    SetFunction::from_series(weights.to_vec(), n, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::value::rat;

    fn measuroid(n: usize) -> SetFunction {
        SetFunction::from_rule(&WeightRule::AlternatingPower { p: 2 }, n).unwrap()
    }

    fn set(atoms: &[usize]) -> AtomSet {
        AtomSet::from_atoms(atoms.iter().copied()).unwrap()
    }

    #[test]
    fn series_values_match_hand_sums() {
        let m = measuroid(3);
        assert_eq!(m.eval(set(&[1, 3])), LatticeValue::Scalar(rat(10, 9)));
        assert_eq!(m.eval(set(&[1, 2, 3])), LatticeValue::Scalar(rat(31, 36)));
        assert!(m.eval(AtomSet::EMPTY).is_zero());
        let expected = [rat(0, 1), rat(1, 1), rat(1, 4), rat(3, 4), rat(1, 9), rat(10, 9), rat(5, 36), rat(31, 36)];
        let values = m.values().unwrap();
        for (mask, e) in expected.iter().enumerate() {
            assert_eq!(values[mask], LatticeValue::Scalar(e.clone()));
            assert_eq!(m.eval(AtomSet(mask as u32)), values[mask]);
        }
    }

    #[test]
    fn make_series_from_weights() {
        let w = vec![rat(-1, 1), rat(1, 4), rat(-1, 9), rat(5, 1)];
        let m = make_series_setfunction(&w, 3).unwrap();
        assert_eq!(m.eval(set(&[1, 3])), LatticeValue::Scalar(rat(10, 9)));
        assert!(make_series_setfunction(&w[..2], 3).is_err());
    }

    #[test]
    fn table_validation() {
        assert!(SetFunction::from_table(1, vec![LatticeValue::Scalar(rat(1, 1)); 2]).is_err());
        assert!(SetFunction::from_table(1, vec![LatticeValue::Scalar(rat(0, 1)), LatticeValue::Scalar(rat(-1, 1))])
            .is_err());
        assert!(SetFunction::from_table(2, vec![LatticeValue::Scalar(rat(0, 1)); 3]).is_err());
        assert!(FiniteAlgebra::new(25).is_err());
    }

    #[test]
    fn record_roundtrip() {
        let m = measuroid(4);
        let json = serde_json::to_string(&m).unwrap();
        let back: SetFunction = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);

        let t = m.to_table().unwrap();
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains("\"{1,3}\":\"10/9\""));
        let back: SetFunction = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);

        let v = SetFunction::from_fn(2, |a| LatticeValue::Vector(vec![rat(a.len() as i64, 1), rat(0, 1)])).unwrap();
        let back: SetFunction = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn bitmask_keys_accepted() {
        let json = r#"{"atoms":2,"backing":"table","table":{"3":"1/2","{1}":"1/3"}}"#;
        let m: SetFunction = serde_json::from_str(json).unwrap();
        assert_eq!(m.eval(set(&[1, 2])), LatticeValue::Scalar(rat(1, 2)));
        assert_eq!(m.eval(set(&[1])), LatticeValue::Scalar(rat(1, 3)));
    }

    #[test]
    fn scaling() {
        let m = measuroid(3).scaled(&rat(3, 2)).unwrap();
        assert_eq!(m.eval(set(&[1, 3])), LatticeValue::Scalar(rat(5, 3)));
        assert!(measuroid(3).scaled(&rat(-1, 1)).is_err());
    }
}
