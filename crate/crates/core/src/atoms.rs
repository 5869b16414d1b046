//! Finite sets of atoms `{1..n}` packed into a `u32` bitmask (atom `a` is bit `a - 1`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Largest ground set representable by [`AtomSet`].
pub const MAX_ATOMS: usize = 24;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomSet(pub u32);

impl AtomSet {
    pub const EMPTY: AtomSet = AtomSet(0);

    /// The ground set `{1..n}`.
    pub fn full(n: usize) -> AtomSet {
        debug_assert!(n <= MAX_ATOMS);
        AtomSet(((1u64 << n) - 1) as u32)
    }

    pub fn from_atoms<I: IntoIterator<Item = usize>>(atoms: I) -> Result<AtomSet, Error> {
        let mut mask = 0u32;
        for a in atoms {
            if a == 0 || a > MAX_ATOMS {
                return Err(Error::Parse(format!("atom {a} outside 1..={MAX_ATOMS}")));
            }
            mask |= 1 << (a - 1);
        }
        Ok(AtomSet(mask))
    }

    pub fn singleton(atom: usize) -> AtomSet {
        assert!((1..=MAX_ATOMS).contains(&atom), "atom {atom} out of range");
        AtomSet(1 << (atom - 1))
    }

    /// Atoms `lo..=hi`; empty when `lo > hi`.
    pub fn interval(lo: usize, hi: usize) -> AtomSet {
        AtomSet::from_atoms(lo.max(1)..=hi).expect("interval within range")
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, atom: usize) -> bool {
        (1..=MAX_ATOMS).contains(&atom) && self.0 & (1 << (atom - 1)) != 0
    }

    pub fn union(self, other: AtomSet) -> AtomSet {
        AtomSet(self.0 | other.0)
    }

    pub fn intersection(self, other: AtomSet) -> AtomSet {
        AtomSet(self.0 & other.0)
    }

    pub fn difference(self, other: AtomSet) -> AtomSet {
        AtomSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: AtomSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: AtomSet) -> bool {
        self.0 & other.0 == 0
    }

    /// Largest atom, if any.
    pub fn max_atom(self) -> Option<usize> {
        (self.0 != 0).then(|| 32 - self.0.leading_zeros() as usize)
    }

    pub fn atoms(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let a = rest.trailing_zeros() as usize + 1;
            rest &= rest - 1;
            Some(a)
        })
    }

    /// All subsets of `self`, from `self` itself down to the empty set.
    pub fn subsets(self) -> Subsets {
        Subsets { full: self.0, next: Some(self.0) }
    }

    pub fn union_all<I: IntoIterator<Item = AtomSet>>(sets: I) -> AtomSet {
        sets.into_iter().fold(AtomSet::EMPTY, AtomSet::union)
    }
}

/// Descending submask enumeration.
#[derive(Clone, Debug)]
pub struct Subsets {
    full: u32,
    next: Option<u32>,
}

impl Iterator for Subsets {
    type Item = AtomSet;

    fn next(&mut self) -> Option<AtomSet> {
        let cur = self.next?;
        self.next = (cur != 0).then(|| (cur - 1) & self.full);
        Some(AtomSet(cur))
    }
}

impl fmt::Display for AtomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.atoms().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

impl FromStr for AtomSet {
    type Err = Error;

    /// Parses `{1,3}`, `1,3` or `{}`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s.trim().trim_start_matches('{').trim_end_matches('}').trim();
        if body.is_empty() {
            return Ok(AtomSet::EMPTY);
        }
        let atoms = body
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|e| Error::Parse(format!("atom {t:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        AtomSet::from_atoms(atoms)
    }
}

// Sets travel as sorted atom lists in fixture files.
impl Serialize for AtomSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.atoms())
    }
}

impl<'de> Deserialize<'de> for AtomSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let atoms = Vec::<usize>::deserialize(deserializer)?;
        AtomSet::from_atoms(atoms).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_and_parse() {
        let s = AtomSet::from_atoms([3, 1]).unwrap();
        assert_eq!(s.to_string(), "{1,3}");
        assert_eq!("{1,3}".parse::<AtomSet>().unwrap(), s);
        assert_eq!("{}".parse::<AtomSet>().unwrap(), AtomSet::EMPTY);
        assert!("{0}".parse::<AtomSet>().is_err());
    }

    #[test]
    fn subsets_enumerates_all() {
        let s = AtomSet::from_atoms([1, 3, 4]).unwrap();
        let subs: Vec<_> = s.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert_eq!(subs[0], s);
        assert_eq!(*subs.last().unwrap(), AtomSet::EMPTY);
        assert!(subs.iter().all(|b| b.is_subset(s)));
        assert_eq!(AtomSet::EMPTY.subsets().count(), 1);
    }

    #[test]
    fn full_and_interval() {
        assert_eq!(AtomSet::full(3).to_string(), "{1,2,3}");
        assert_eq!(AtomSet::full(24).len(), 24);
        assert_eq!(AtomSet::interval(2, 4).to_string(), "{2,3,4}");
        assert!(AtomSet::interval(5, 4).is_empty());
        assert_eq!(AtomSet::interval(2, 4).max_atom(), Some(4));
    }
}
