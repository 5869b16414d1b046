//! `v(m)(A) = ⋁ {m(B) : B ⊂ A}`.

use super::function::SetFunction;
use crate::atoms::AtomSet;
use crate::error::Result;
use crate::lattice::value::{Carrier, LatticeValue};

/// Above this many atoms the semivariation is evaluated lazily per query.
pub const SEMIVARIATION_TABLE_ATOMS: usize = 16;

/// `v(A) = m(A) ∨ ⋁_{a∈A} v(A∖{a})`, filled in increasing bitmask order.
pub fn semivariation_values(values: &[LatticeValue]) -> Vec<LatticeValue> {
    let mut v: Vec<LatticeValue> = Vec::with_capacity(values.len());
    for (mask, m) in values.iter().enumerate() {
        let mut best = m.clone();
        let mut rest = mask;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            best = best.join(&v[mask ^ bit]);
            rest ^= bit;
        }
        v.push(best);
    }
    v
}

/// The semivariation as a set function: a table up to
/// [`SEMIVARIATION_TABLE_ATOMS`] atoms, a lazy envelope above.
pub fn semivariation(m: &SetFunction) -> Result<SetFunction> {
    if m.atoms() > SEMIVARIATION_TABLE_ATOMS {
        return Ok(SetFunction::envelope(m.clone()));
    }
    SetFunction::from_table(m.atoms(), semivariation_values(&m.values()?))
}

/// Full semivariation table with, for scalar carriers, a subset attaining
/// each supremum (the set itself on ties, then the first child in atom order).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemivariationTable {
    pub values: Vec<LatticeValue>,
    pub argmax: Option<Vec<AtomSet>>,
}

pub fn semivariation_table(m: &SetFunction) -> Result<SemivariationTable> {
    let base = m.values()?;
    if m.carrier() != Carrier::Scalar {
        return Ok(SemivariationTable { values: semivariation_values(&base), argmax: None });
    }
    let mut values: Vec<LatticeValue> = Vec::with_capacity(base.len());
    let mut argmax: Vec<AtomSet> = Vec::with_capacity(base.len());
    for (mask, mv) in base.iter().enumerate() {
        let mut best = mv.clone();
        let mut arg = AtomSet(mask as u32);
        let mut rest = mask;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            let child = mask ^ bit;
            if !values[child].le(&best) {
                best = values[child].clone();
                arg = argmax[child];
            }
            rest ^= bit;
        }
        values.push(best);
        argmax.push(arg);
    }
    Ok(SemivariationTable { values, argmax: Some(argmax) })
}
