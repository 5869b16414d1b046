//! Set functions on finite subsets of ℕ given by an absolutely summable
//! weight rule, `m(A) = |c·Σ_{n∈A} w_n|`.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::regulator::{o_sequence_from_regulator, Regulator};
use crate::lattice::value::{int, rat, rational_serde, LatticeValue, Rational};
use crate::setfun::WeightRule;

/// Indices at or beyond this are never weighed exactly; they fall into the tail.
pub const EXACT_LIMIT: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountableSetFunction {
    pub rule: WeightRule,
    #[serde(with = "rational_serde")]
    pub scale: Rational,
}

impl CountableSetFunction {
    /// Rejects rules without a tail oracle.
    pub fn new(rule: WeightRule) -> Result<Self> {
        rule.validate()?;
        Ok(CountableSetFunction { rule, scale: int(1) })
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        CountableSetFunction { rule: self.rule.clone(), scale: &self.scale * c }
    }

    /// `c·w_n`.
    pub fn weight(&self, n: u64) -> Rational {
        &self.scale * self.rule.weight(n as usize)
    }

    /// `|c|·Σ_{n≥N} |w_n|` bound, clamped at [`EXACT_LIMIT`] (the oracle is non-increasing).
    pub fn tail_bound(&self, big_n: u64) -> Rational {
        let n = big_n.clamp(1, EXACT_LIMIT) as usize;
        self.scale.abs() * self.rule.tail_bound(n).expect("validated on construction")
    }

    pub fn total_variation(&self) -> Rational {
        self.tail_bound(1)
    }

    pub fn eval(&self, set: &[u64]) -> Rational {
        set.iter().map(|&n| self.weight(n)).sum::<Rational>().abs()
    }

    /// `v(m)` of a finite set: the larger of the positive and negative parts.
    pub fn semivariation(&self, set: &[u64]) -> Rational {
        let (mut pos, mut neg) = (Rational::zero(), Rational::zero());
        for &n in set {
            let w = self.weight(n);
            if w.is_positive() {
                pos += w;
            } else {
                neg -= w;
            }
        }
        pos.max(neg)
    }

    /// Tail regulator `a_{1,l} = tail_bound(l)` for `(s)`-boundedness along
    /// sequences of sets moving to infinity.
    pub fn tail_regulator(&self, cols: usize) -> Result<Regulator> {
        Regulator::new(vec![(1..=cols.max(1)).map(|l| LatticeValue::Scalar(self.tail_bound(l as u64))).collect()])
    }
}

impl fmt::Display for CountableSetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == int(1) {
            write!(f, "{}", self.rule)
        } else {
            write!(f, "{}·({})", self.scale, self.rule)
        }
    }
}

/// `b_l` for `l = 1..levels`: the level suprema of the joint tail regulator
/// of `ms` at targets `1/l`.
pub fn derived_targets(ms: &[CountableSetFunction], levels: usize) -> Result<Vec<Rational>> {
    if ms.is_empty() {
        return Err(Error::EmptyInput("set functions"));
    }
    if levels == 0 {
        return Err(Error::EmptyInput("levels"));
    }
    let last = LatticeValue::Scalar(rat(1, levels as i64));
    let joint = |l: u64| ms.iter().map(|m| m.tail_bound(l)).max().expect("non-empty");
    let cols = (1..=EXACT_LIMIT)
        .find(|&c| LatticeValue::Scalar(joint(c)).le(&last))
        .ok_or_else(|| Error::NoSuchColumn { row: 1, target: last.to_string() })?;
    let reg = Regulator::new(vec![(1..=cols).map(|l| LatticeValue::Scalar(joint(l))).collect()])?;
    let targets: Vec<LatticeValue> = (1..=levels).map(|l| LatticeValue::Scalar(rat(1, l as i64))).collect();
    Ok(o_sequence_from_regulator(&reg, &targets)?
        .into_iter()
        .map(|lvl| lvl.sigma.as_scalar().expect("scalar regulator").clone())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alt2() -> CountableSetFunction {
        CountableSetFunction::new(WeightRule::AlternatingPower { p: 2 }).unwrap()
    }

    #[test]
    fn rejects_non_summable() {
        assert!(matches!(CountableSetFunction::new(WeightRule::Harmonic), Err(Error::NoTailBound(_))));
        assert!(CountableSetFunction::new(WeightRule::AlternatingPower { p: 1 }).is_err());
    }

    #[test]
    fn eval_and_semivariation() {
        let m = alt2();
        assert_eq!(m.eval(&[1, 3]), rat(10, 9));
        assert_eq!(m.eval(&[1, 2, 3]), rat(31, 36));
        assert_eq!(m.semivariation(&[1, 2, 3]), rat(10, 9));
        assert_eq!(m.eval(&[]), int(0));
    }

    #[test]
    fn tail_bound_dominates_partial_sums() {
        let m = alt2();
        for big_n in [2u64, 3, 10, 100] {
            let partial: Rational = (big_n..big_n + 200).map(|n| m.weight(n).abs()).sum();
            assert!(partial <= m.tail_bound(big_n));
            assert!(m.tail_bound(big_n + 1) <= m.tail_bound(big_n));
        }
        assert_eq!(m.scaled(&int(2)).tail_bound(3), rat(1, 1));
        assert_eq!(m.tail_bound(u64::MAX), m.tail_bound(EXACT_LIMIT));
    }

    #[test]
    fn derived_targets_harmonic_levels() {
        let b = derived_targets(&[alt2()], 4).unwrap();
        assert_eq!(b, vec![rat(1, 1), rat(1, 2), rat(1, 3), rat(1, 4)]);
        let zero = CountableSetFunction::new(WeightRule::Zero).unwrap();
        assert!(derived_targets(&[zero], 3).unwrap().iter().all(Zero::is_zero));
        let geo = CountableSetFunction::new(WeightRule::Geometric { q: rat(1, 2) }).unwrap();
        let b = derived_targets(&[geo], 3).unwrap();
        assert!(b.windows(2).all(|w| w[1] < w[0]));
        assert!(b.iter().enumerate().all(|(i, v)| *v <= rat(1, i as i64 + 1)));
    }
}
