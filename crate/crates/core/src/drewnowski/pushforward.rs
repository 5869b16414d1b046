//! Pushforward `μ(A) = m(⋃_{r∈A} B_r)` onto the index algebra `𝒫({1..R})`.

use serde::{Deserialize, Serialize};

use super::countable::CountableSetFunction;
use crate::atoms::AtomSet;
use crate::error::{Error, Result};
use crate::lattice::value::{LatticeValue, Rational};
use crate::setfun::{check_k_triangular, SetFunction, TriangularityReport};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pushforward {
    pub function: SetFunction,
    /// k-triangularity of `μ`, checked exhaustively on construction.
    pub report: TriangularityReport,
}

/// Pushforward of a finite-algebra set function along disjoint blocks.
pub fn pushforward(m: &SetFunction, blocks: &[AtomSet], k: &Rational) -> Result<Pushforward> {
    for (i, b) in blocks.iter().enumerate() {
        m.algebra().check_member(*b)?;
        if let Some(c) = blocks[..i].iter().find(|c| !c.is_disjoint(*b)) {
            return Err(Error::NotDisjoint { first: *c, second: *b });
        }
    }
    let mu = SetFunction::from_fn(blocks.len(), |a| m.eval(AtomSet::union_all(a.atoms().map(|r| blocks[r - 1]))))?;
    let report = check_k_triangular(&mu, k)?;
    Ok(Pushforward { function: mu, report })
}

/// Pushforward of a series-backed function along disjoint finite blocks of ℕ.
pub fn pushforward_countable(m: &CountableSetFunction, blocks: &[Vec<u64>], k: &Rational) -> Result<Pushforward> {
    for (i, b) in blocks.iter().enumerate() {
        if b.contains(&0) {
            return Err(Error::InvalidSequence(format!("block {} contains 0", i + 1)));
        }
        for (j, c) in blocks[..i].iter().enumerate() {
            if c.iter().any(|n| b.contains(n)) {
                return Err(Error::InvalidSequence(format!("blocks {} and {} overlap", j + 1, i + 1)));
            }
        }
    }
    let sums: Vec<Rational> = blocks.iter().map(|b| b.iter().map(|&n| m.weight(n)).sum()).collect();
    let mu = SetFunction::from_fn(blocks.len(), |a| {
        LatticeValue::Scalar(num_traits::Signed::abs(&a.atoms().map(|r| sums[r - 1].clone()).sum::<Rational>()))
    })?;
    let report = check_k_triangular(&mu, k)?;
    Ok(Pushforward { function: mu, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::value::{int, rat};
    use crate::setfun::WeightRule;

    #[test]
    fn even_blocks() {
        let m = CountableSetFunction::new(WeightRule::AlternatingPower { p: 2 }).unwrap();
        let blocks: Vec<Vec<u64>> = (1..=4).map(|r| vec![2 * r]).collect();
        let p = pushforward_countable(&m, &blocks, &int(1)).unwrap();
        assert_eq!(p.function.eval(AtomSet::from_atoms([1, 2]).unwrap()), LatticeValue::Scalar(rat(5, 16)));
        assert!(p.function.eval(AtomSet::EMPTY).is_zero());
        assert!(p.report.is_k_triangular());
        assert!(pushforward_countable(&m, &[vec![1, 2], vec![2]], &int(1)).is_err());
    }

    #[test]
    fn singleton_blocks_restrict() {
        let m = SetFunction::from_rule(&WeightRule::AlternatingPower { p: 2 }, 6).unwrap();
        let blocks: Vec<AtomSet> = (1..=6).map(AtomSet::singleton).collect();
        let p = pushforward(&m, &blocks, &int(1)).unwrap();
        for a in m.algebra().members() {
            assert_eq!(p.function.eval(a), m.eval(a));
        }
        let bad = [AtomSet::from_atoms([1, 2]).unwrap(), AtomSet::singleton(2)];
        assert!(matches!(pushforward(&m, &bad, &int(1)), Err(Error::NotDisjoint { .. })));
    }
}
