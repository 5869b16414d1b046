//! Combining countably many regulators into one that dominates every
//! finite, shifted partial sum of their suprema.

use serde::{Deserialize, Serialize};

use super::regulator::{regulator_sup, IndexMap, Regulator};
use super::value::{int, LatticeValue};
use crate::error::{Error, Result};

/// Builds `a` with `u ∧ Σ_{n≤q} ⋁_t regs[n]_{t,φ(t+n)} <= ⋁_s a_{s,φ(s)}`
/// for every `φ` and every `q <= N`.
///
/// Row `s` of `a` collects, in column `l`, the entries of every input row
/// that a shift by `n` moves onto row `s`:
/// `a_{s,l} = u ∧ N · Σ_{n : 1 <= s-n <= T_n} regs[n]_{s-n,l}`.
/// Each shifted supremum is then bounded by `⋁_s c_{s,φ(s)}`, so `N` copies
/// of that supremum bound the partial sum.
pub fn fremlin_combine(regs: &[Regulator], u: &LatticeValue) -> Result<Regulator> {
    let first = regs.first().ok_or(Error::EmptyInput("regulator list"))?;
    let carrier = first.carrier();
    let cols = first.cols();
    u.check_carrier(carrier)?;
    if !u.is_nonnegative() {
        return Err(Error::InvalidRegulator("the cap u must be non-negative".into()));
    }
    for (i, r) in regs.iter().enumerate() {
        if r.carrier() != carrier {
            return Err(Error::CarrierMismatch { expected: carrier.to_string(), found: r.carrier().to_string() });
        }
        if r.cols() != cols {
            return Err(Error::DimensionMismatch(format!(
                "regulator {} has {} columns, expected {cols}",
                i + 1,
                r.cols()
            )));
        }
    }
    let big_n = int(regs.len() as i64);
    let rows = regs.iter().enumerate().map(|(i, r)| r.rows() + i + 1).max().expect("non-empty");
    let mut entries = Vec::with_capacity(rows);
    for s in 1..=rows {
        let row = (1..=cols)
            .map(|l| {
                let mut c = LatticeValue::zero(carrier);
                for (i, r) in regs.iter().enumerate() {
                    let n = i + 1;
                    if s > n && s - n <= r.rows() {
                        c = &c + r.entry(s - n, l);
                    }
                }
                u.meet(&c.scale(&big_n))
            })
            .collect();
        entries.push(row);
    }
    Regulator::with_bound(entries, u.clone())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FremlinReport {
    pub checked: usize,
    /// `(q, φ)` pairs where the combined supremum fails to dominate.
    pub failures: Vec<(usize, IndexMap)>,
}

impl FremlinReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks the combining inequality for every sampled `φ` and every `q`.
/// Each `φ` must cover the combined regulator's rows.
pub fn fremlin_check(
    regs: &[Regulator],
    u: &LatticeValue,
    combined: &Regulator,
    phis: &[IndexMap],
) -> Result<FremlinReport> {
    let mut report = FremlinReport { checked: 0, failures: Vec::new() };
    for phi in phis {
        let rhs = regulator_sup(combined, phi)?;
        let mut partial = LatticeValue::zero(combined.carrier());
        for (i, r) in regs.iter().enumerate() {
            let psi = phi.shifted(i + 1);
            partial = &partial + &regulator_sup(r, &psi)?;
            report.checked += 1;
            if !u.meet(&partial).le(&rhs) {
                report.failures.push((i + 1, phi.clone()));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::phi::PhiSampler;
    use crate::lattice::value::{rat, Carrier};

    fn s(n: i64, d: i64) -> LatticeValue {
        LatticeValue::Scalar(rat(n, d))
    }

    fn harmonic(rows: usize, cols: usize) -> Regulator {
        Regulator::from_rule(rows, cols, |_, l| s(1, l as i64)).unwrap()
    }

    #[test]
    fn zero_input_gives_zero() {
        let zero = Regulator::zero(Carrier::Scalar, 6, 6);
        let a = fremlin_combine(std::slice::from_ref(&zero), &s(3, 1)).unwrap();
        assert!(a.entries().iter().flatten().all(LatticeValue::is_zero));
        let phis = PhiSampler::new(a.rows(), a.cols(), 0).with_random(50).sample();
        assert!(fremlin_check(&[zero], &s(3, 1), &a, &phis).unwrap().holds());
    }

    #[test]
    fn single_regulator_dominated_at_shift() {
        let r = Regulator::from_rule(6, 6, |t, l| s(1, (t + l) as i64)).unwrap();
        let u = s(1, 1);
        let a = fremlin_combine(std::slice::from_ref(&r), &u).unwrap();
        for t in 1..=6 {
            for l in 1..=6 {
                assert!(r.entry(t, l).le(a.entry(t + 1, l)));
            }
        }
        let phis = PhiSampler::new(a.rows(), 6, 11).sample();
        let report = fremlin_check(&[r], &u, &a, &phis).unwrap();
        assert!(report.holds());
        assert_eq!(report.checked, 6 + 6 + 1000);
    }

    #[test]
    fn two_harmonic_copies_on_constant_maps() {
        let r = harmonic(6, 6);
        let u = s(10, 1);
        let a = fremlin_combine(&[r.clone(), r.clone()], &u).unwrap();
        for l in 1..=6usize {
            let phi = IndexMap::constant(a.rows(), l);
            let sup = regulator_sup(&a, &phi).unwrap();
            let l = l as i64;
            assert!((&s(1, l + 1) + &s(1, l + 2)).meet(&u).le(&sup));
        }
        let phis = PhiSampler::new(a.rows(), 6, 5).sample();
        assert!(fremlin_check(&[r.clone(), r], &u, &a, &phis).unwrap().holds());
    }

    #[test]
    fn shifted_spec_formula_is_not_enough() {
        // column-shift candidate a_{t,l} = u ∧ Σ_n r_n[t][min(l+n, L)]
        let cols = 3;
        let r1 = Regulator::new(vec![vec![s(1, 1), s(0, 1), s(0, 1)], vec![s(0, 1); 3], vec![s(0, 1); 3]]).unwrap();
        let candidate: Vec<Vec<LatticeValue>> =
            (1..=3).map(|t| (1..=cols).map(|l| r1.entry(t, (l + 1).min(cols)).clone()).collect()).collect();
        let candidate = Regulator::new(candidate).unwrap();
        let phi = IndexMap::new(vec![3, 1, 1]).unwrap();
        let report = fremlin_check(std::slice::from_ref(&r1), &s(5, 1), &candidate, &phi_padded(&phi, 4)).unwrap();
        assert!(!report.holds());
        let a = fremlin_combine(std::slice::from_ref(&r1), &s(5, 1)).unwrap();
        assert!(fremlin_check(&[r1], &s(5, 1), &a, &phi_padded(&phi, a.rows())).unwrap().holds());
    }

    fn phi_padded(phi: &IndexMap, rows: usize) -> Vec<IndexMap> {
        let mut v = phi.values().to_vec();
        v.resize(rows, 1);
        vec![IndexMap::new(v).unwrap()]
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(fremlin_combine(&[], &s(1, 1)), Err(Error::EmptyInput(_))));
        let a = harmonic(2, 3);
        let b = harmonic(2, 4);
        assert!(fremlin_combine(&[a, b], &s(1, 1)).is_err());
    }
}
