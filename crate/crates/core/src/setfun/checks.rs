//! Exhaustive checkers: k-subadditivity, k-triangularity, minimal k,
//! monotonicity and the finite triangularity chain.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::function::SetFunction;
use crate::atoms::AtomSet;
use crate::error::{Error, Result};
use crate::lattice::convergence::{Certificate, Horizon, Witness};
use crate::lattice::value::{rational_serde, Carrier, LatticeValue, Rational};

/// Ordered disjoint pairs grow as `3^n`; beyond this the sweep is refused.
pub const MAX_PAIR_ATOMS: usize = 14;

/// Violation lists keep at most this many pairs; counts stay exact.
pub const VIOLATION_CAP: usize = 1024;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangularityReport {
    #[serde(with = "rational_serde")]
    pub k_tested: Rational,
    pub pairs_checked: u64,
    /// `(A, B)` with `m(A∪B) > m(A) + k·m(B)`.
    pub subadditivity_violations: Vec<(AtomSet, AtomSet)>,
    pub subadditivity_count: u64,
    /// `(A, B)` with `m(A) − k·m(B) > m(A∪B)`.
    pub lower_violations: Vec<(AtomSet, AtomSet)>,
    pub lower_count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::lattice::value::opt_rational_serde")]
    pub minimal_k: Option<Rational>,
}

impl TriangularityReport {
    pub fn is_k_subadditive(&self) -> bool {
        self.subadditivity_count == 0
    }

    pub fn is_k_triangular(&self) -> bool {
        self.subadditivity_count == 0 && self.lower_count == 0
    }
}

fn check_k(k: &Rational) -> Result<()> {
    if k.is_negative() {
        return Err(Error::InvalidSetFunction(format!("k = {k} is negative")));
    }
    Ok(())
}

fn check_pair_size(m: &SetFunction) -> Result<()> {
    if m.atoms() > MAX_PAIR_ATOMS {
        return Err(Error::TooLarge { what: "atoms for pair enumeration", n: m.atoms(), max: MAX_PAIR_ATOMS });
    }
    Ok(())
}

/// Like [`for_each_disjoint_pair`], stopping once `f` returns false.
fn try_each_disjoint_pair(n: usize, mut f: impl FnMut(usize, usize) -> bool) {
    let full = (1usize << n) - 1;
    for a in 0..=full {
        let comp = full ^ a;
        let mut b = comp;
        loop {
            if !f(a, b) {
                return;
            }
            if b == 0 {
                break;
            }
            b = (b - 1) & comp;
        }
    }
}

/// Calls `f(A, B)` for every ordered pair of disjoint subsets of `{1..n}`.
pub fn for_each_disjoint_pair(n: usize, mut f: impl FnMut(usize, usize)) {
    let full = (1usize << n) - 1;
    for a in 0..=full {
        let comp = full ^ a;
        let mut b = comp;
        loop {
            f(a, b);
            if b == 0 {
                break;
            }
            b = (b - 1) & comp;
        }
    }
}

/// Scalar values and their k-multiples over a common denominator, when every
/// numerator fits comfortably in `i128`.
fn integer_image(values: &[LatticeValue], k: &Rational) -> Option<(Vec<i128>, Vec<i128>)> {
    let scalars: Vec<&Rational> = values.iter().map(LatticeValue::as_scalar).collect::<Option<_>>()?;
    let scaled: Vec<Rational> = scalars.iter().map(|v| *v * k).collect();
    let mut lcm = BigInt::from(1);
    for r in scalars.iter().copied().chain(scaled.iter()) {
        lcm = lcm.lcm(r.denom());
    }
    let bound = i128::MAX / 4;
    let lift = |r: &Rational| -> Option<i128> {
        let n = (r.numer() * (&lcm / r.denom())).to_i128()?;
        (n.abs() <= bound).then_some(n)
    };
    let plain = scalars.iter().map(|r| lift(r)).collect::<Option<Vec<_>>>()?;
    let times_k = scaled.iter().map(lift).collect::<Option<Vec<_>>>()?;
    Some((plain, times_k))
}

/// First ordered disjoint pair `(A, B)` breaking either k-triangularity
/// inequality, scanning `A` upward and `B` downward; `None` when m is k-triangular.
pub fn k_triangular_witness(m: &SetFunction, k: &Rational) -> Result<Option<(AtomSet, AtomSet)>> {
    check_k(k)?;
    check_pair_size(m)?;
    let values = m.values()?;
    let mut found = None;
    if let Some((v, kv)) = integer_image(&values, k) {
        try_each_disjoint_pair(m.atoms(), |a, b| {
            let ok = v[a | b] <= v[a] + kv[b] && v[a] <= v[a | b] + kv[b];
            if !ok {
                found = Some((AtomSet(a as u32), AtomSet(b as u32)));
            }
            ok
        });
    } else {
        let scaled: Vec<LatticeValue> = values.iter().map(|v| v.scale(k)).collect();
        try_each_disjoint_pair(m.atoms(), |a, b| {
            let ok = values[a | b].le(&(&values[a] + &scaled[b])) && values[a].le(&(&values[a | b] + &scaled[b]));
            if !ok {
                found = Some((AtomSet(a as u32), AtomSet(b as u32)));
            }
            ok
        });
    }
    Ok(found)
}

/// Tests `m(A∪B) <= m(A) + k·m(B)` and `m(A) − k·m(B) <= m(A∪B)` over all
/// ordered disjoint pairs.
pub fn check_k_triangular(m: &SetFunction, k: &Rational) -> Result<TriangularityReport> {
    check_k(k)?;
    check_pair_size(m)?;
    let values = m.values()?;
    let mut report = TriangularityReport {
        k_tested: k.clone(),
        pairs_checked: 0,
        subadditivity_violations: Vec::new(),
        subadditivity_count: 0,
        lower_violations: Vec::new(),
        lower_count: 0,
        minimal_k: None,
    };
    if let Some((v, kv)) = integer_image(&values, k) {
        for_each_disjoint_pair(m.atoms(), |a, b| {
            report.pairs_checked += 1;
            let pair = (AtomSet(a as u32), AtomSet(b as u32));
            if v[a | b] > v[a] + kv[b] {
                report.subadditivity_count += 1;
                if report.subadditivity_violations.len() < VIOLATION_CAP {
                    report.subadditivity_violations.push(pair);
                }
            }
            if v[a] > v[a | b] + kv[b] {
                report.lower_count += 1;
                if report.lower_violations.len() < VIOLATION_CAP {
                    report.lower_violations.push(pair);
                }
            }
        });
    } else {
        let scaled: Vec<LatticeValue> = values.iter().map(|v| v.scale(k)).collect();
        for_each_disjoint_pair(m.atoms(), |a, b| {
            report.pairs_checked += 1;
            let union = &values[a | b];
            let (ma, kmb) = (&values[a], &scaled[b]);
            let pair = (AtomSet(a as u32), AtomSet(b as u32));
            if !union.le(&(ma + kmb)) {
                report.subadditivity_count += 1;
                if report.subadditivity_violations.len() < VIOLATION_CAP {
                    report.subadditivity_violations.push(pair);
                }
            }
            if !ma.le(&(union + kmb)) {
                report.lower_count += 1;
                if report.lower_violations.len() < VIOLATION_CAP {
                    report.lower_violations.push(pair);
                }
            }
        });
    }
    if m.carrier() == Carrier::Scalar {
        report.minimal_k = minimal_k(m)?;
    }
    Ok(report)
}

/// Subadditivity half only, stopping at the first failure.
pub fn is_k_subadditive(m: &SetFunction, k: &Rational) -> Result<bool> {
    check_k(k)?;
    check_pair_size(m)?;
    let values = m.values()?;
    let scaled: Vec<LatticeValue> = values.iter().map(|v| v.scale(k)).collect();
    let n = m.atoms();
    let full = (1usize << n) - 1;
    for a in 0..=full {
        let comp = full ^ a;
        let mut b = comp;
        while b != 0 {
            if !values[a | b].le(&(&values[a] + &scaled[b])) {
                return Ok(false);
            }
            b = (b - 1) & comp;
        }
    }
    Ok(true)
}

/// Smallest `k >= 0` making `m` k-triangular: the largest
/// `|m(A∪B) − m(A)| / m(B)` over disjoint pairs with `m(B) > 0`.
/// `None` when a pair with `m(B) = 0` has `m(A∪B) ≠ m(A)`, so no k works.
pub fn minimal_k(m: &SetFunction) -> Result<Option<Rational>> {
    if m.carrier() != Carrier::Scalar {
        return Err(Error::NotTotallyOrdered);
    }
    check_pair_size(m)?;
    let values: Vec<Rational> = m.values()?.iter().map(|v| v.as_scalar().expect("scalar carrier").clone()).collect();
    let mut best = Rational::zero();
    let mut finite = true;
    for_each_disjoint_pair(m.atoms(), |a, b| {
        let gap = (&values[a | b] - &values[a]).abs();
        if values[b].is_zero() {
            if !gap.is_zero() {
                finite = false;
            }
        } else {
            let ratio = gap / &values[b];
            if ratio > best {
                best = ratio;
            }
        }
    });
    Ok(finite.then_some(best))
}

/// Checks `m(B∖{a}) <= m(B)` for every `B` and `a ∈ B`, which is equivalent
/// to monotonicity. Sets are scanned from the largest bitmask down, atoms in
/// increasing order; the first failure is the witness `(B∖{a}, B)`.
pub fn is_monotone(m: &SetFunction) -> Result<Certificate> {
    let values = m.values()?;
    let horizon = Horizon { length: values.len(), ..Horizon::default() };
    for b in (1..values.len()).rev() {
        let set = AtomSet(b as u32);
        for atom in set.atoms() {
            let a = set.difference(AtomSet::singleton(atom));
            let (ma, mb) = (&values[a.bits() as usize], &values[b]);
            if !ma.le(mb) {
                let witness =
                    Witness::new("m(A) <= m(B) for A ⊂ B").sets(vec![a, set]).values(vec![ma.clone(), mb.clone()]);
                return Ok(Certificate::violated(horizon, witness));
            }
        }
    }
    Ok(Certificate::holds(horizon))
}

/// Verifies `m(E₁) − kΣ_{q≥2} m(E_q) <= m(∪E_q) <= m(E₁) + kΣ_{q≥2} m(E_q)`
/// and `m(E₁) <= m(∪E_q) + kΣ_{q≥2} m(E_q)` for pairwise disjoint `E_q`.
///
/// On failure the induction steps `(E₁∪…∪E_{i−1}, E_i)` are rechecked and the
/// first one breaking k-triangularity is reported.
pub fn finite_chain_check(m: &SetFunction, sets: &[AtomSet], k: &Rational) -> Result<Certificate> {
    check_k(k)?;
    if sets.len() < 2 {
        return Err(Error::InvalidSequence(format!("need at least 2 sets, got {}", sets.len())));
    }
    for (i, a) in sets.iter().enumerate() {
        m.algebra().check_member(*a)?;
        for b in &sets[i + 1..] {
            if !a.is_disjoint(*b) {
                return Err(Error::NotDisjoint { first: *a, second: *b });
            }
        }
    }
    let horizon = Horizon { length: sets.len(), ..Horizon::default() };
    let first = m.eval(sets[0]);
    let rest = LatticeValue::sum_all(m.carrier(), &sets[1..].iter().map(|e| m.eval(*e)).collect::<Vec<_>>()).scale(k);
    let union = m.eval(AtomSet::union_all(sets.iter().copied()));
    let lower = &first - &rest;
    let upper = &first + &rest;
    let holds = lower.le(&union) && union.le(&upper) && first.le(&(&union + &rest));
    if holds {
        return Ok(Certificate::holds(horizon));
    }
    let mut prefix = sets[0];
    for (i, e) in sets.iter().enumerate().skip(1) {
        let (mp, me) = (m.eval(prefix), m.eval(*e).scale(k));
        let next = prefix.union(*e);
        let mn = m.eval(next);
        if !mn.le(&(&mp + &me)) || !mp.le(&(&mn + &me)) {
            let witness = Witness::new("m is not k-triangular at an induction step")
                .indices(vec![i + 1])
                .sets(vec![prefix, *e])
                .values(vec![mp, mn, me]);
            return Ok(Certificate::violated(horizon, witness));
        }
        prefix = next;
    }
    let witness = Witness::new("chain inequality").sets(sets.to_vec()).values(vec![lower, union, upper]);
    Ok(Certificate::violated(horizon, witness))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::value::{int, rat};
    use crate::lattice::Verdict;
    use crate::setfun::semivariation::semivariation;
    use crate::setfun::weights::WeightRule;
    use proptest::prelude::*;

    fn measuroid(n: usize) -> SetFunction {
        SetFunction::from_rule(&WeightRule::AlternatingPower { p: 2 }, n).unwrap()
    }

    fn set(atoms: &[usize]) -> AtomSet {
        AtomSet::from_atoms(atoms.iter().copied()).unwrap()
    }

    fn additive(weights: &[i64]) -> SetFunction {
        let w: Vec<Rational> = weights.iter().map(|&x| int(x)).collect();
        SetFunction::from_series(w, weights.len(), None).unwrap()
    }

    /// Reference enumeration of ordered disjoint pairs via a ternary code.
    fn brute_pairs(n: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for code in 0..3usize.pow(n as u32) {
            let (mut a, mut b, mut c) = (0, 0, code);
            for i in 0..n {
                match c % 3 {
                    1 => a |= 1 << i,
                    2 => b |= 1 << i,
                    _ => {}
                }
                c /= 3;
            }
            out.push((a, b));
        }
        out.sort_unstable();
        out
    }

    #[test]
    fn pair_enumeration_is_exhaustive() {
        for n in 0..=5 {
            let mut seen = Vec::new();
            for_each_disjoint_pair(n, |a, b| seen.push((a, b)));
            seen.sort_unstable();
            assert_eq!(seen, brute_pairs(n));
        }
    }

    #[test]
    fn measuroid_one_triangular_not_zero_triangular() {
        let r = check_k_triangular(&measuroid(8), &int(1)).unwrap();
        assert!(r.is_k_triangular());
        assert_eq!(r.pairs_checked, 3u64.pow(8));
        let r0 = check_k_triangular(&measuroid(3), &int(0)).unwrap();
        assert!(!r0.is_k_triangular());
        // oracle: 0-triangularity means m(A∪B) = m(A) on disjoint pairs
        let m = measuroid(3);
        let expected = brute_pairs(3)
            .into_iter()
            .filter(|&(a, b)| m.eval(AtomSet((a | b) as u32)) != m.eval(AtomSet(a as u32)))
            .count() as u64;
        assert!(r0.subadditivity_count + r0.lower_count >= expected);
        assert!(r0.subadditivity_violations.contains(&(set(&[2]), set(&[1]))));
    }

    #[test]
    fn zero_function_has_no_violations() {
        let z = SetFunction::zero(4, Carrier::Scalar).unwrap();
        for k in [int(0), int(1), rat(1, 2)] {
            assert!(check_k_triangular(&z, &k).unwrap().is_k_triangular());
        }
        assert_eq!(minimal_k(&z).unwrap(), Some(int(0)));
        assert!(is_monotone(&z).unwrap().is_holds());
    }

    #[test]
    fn minimal_k_of_positive_additive_is_one() {
        let m = additive(&[1, 2, 3, 5]);
        assert_eq!(minimal_k(&m).unwrap(), Some(int(1)));
    }

    #[test]
    fn minimal_k_measuroid_matches_ratio_scan() {
        let m = measuroid(3);
        let mut best = Rational::zero();
        for (a, b) in brute_pairs(3) {
            let mb = m.eval(AtomSet(b as u32)).as_scalar().unwrap().clone();
            if mb.is_zero() {
                continue;
            }
            let gap =
                m.eval(AtomSet((a | b) as u32)).as_scalar().unwrap() - m.eval(AtomSet(a as u32)).as_scalar().unwrap();
            best = best.max(gap.abs() / mb);
        }
        let k = minimal_k(&m).unwrap().unwrap();
        assert_eq!(k, best);
        assert!(k <= int(1));
    }

    #[test]
    fn minimal_k_none_and_vector_rejected() {
        let m =
            SetFunction::from_fn(2, |a| LatticeValue::Scalar(if a == set(&[1, 2]) { int(1) } else { int(0) })).unwrap();
        assert_eq!(minimal_k(&m).unwrap(), None);
        let v = SetFunction::zero(2, Carrier::Vector(2)).unwrap();
        assert!(matches!(minimal_k(&v), Err(Error::NotTotallyOrdered)));
        assert!(check_k_triangular(&v, &int(1)).unwrap().minimal_k.is_none());
    }

    #[test]
    fn measuroid_not_monotone() {
        let cert = is_monotone(&measuroid(3)).unwrap();
        assert_eq!(cert.verdict, Verdict::Violated);
        let w = cert.witness.unwrap();
        assert_eq!(w.sets, vec![set(&[1, 3]), set(&[1, 2, 3])]);
        assert_eq!(w.values, vec![LatticeValue::Scalar(rat(10, 9)), LatticeValue::Scalar(rat(31, 36))]);
        assert!(is_monotone(&semivariation(&measuroid(5)).unwrap()).unwrap().is_holds());
    }

    #[test]
    fn chain_on_measuroid_singletons() {
        let m = measuroid(3);
        let sets = [set(&[1]), set(&[2]), set(&[3])];
        assert!(finite_chain_check(&m, &sets, &int(1)).unwrap().is_holds());
        // 1 − (1/4 + 1/9) <= 31/36 <= 1 + (1/4 + 1/9)
        assert!(rat(1, 1) - rat(13, 36) <= rat(31, 36) && rat(31, 36) <= rat(49, 36));
    }

    #[test]
    fn chain_zero_and_additive() {
        let z = SetFunction::zero(4, Carrier::Scalar).unwrap();
        assert!(finite_chain_check(&z, &[set(&[1]), set(&[2, 3])], &int(2)).unwrap().is_holds());
        let m = additive(&[1, 2, 3, 4]);
        let sets = [set(&[1]), set(&[2, 4])];
        assert!(finite_chain_check(&m, &sets, &int(1)).unwrap().is_holds());
        // right inequality is tight
        assert_eq!(m.eval(set(&[1, 2, 4])), LatticeValue::Scalar(int(7)));
    }

    #[test]
    fn chain_errors_and_witness() {
        let m = measuroid(3);
        assert!(matches!(finite_chain_check(&m, &[set(&[1]), set(&[1, 2])], &int(1)), Err(Error::NotDisjoint { .. })));
        assert!(finite_chain_check(&m, &[set(&[1])], &int(1)).is_err());
        let cert = finite_chain_check(&m, &[set(&[2]), set(&[1])], &int(0)).unwrap();
        assert_eq!(cert.verdict, Verdict::Violated);
        assert_eq!(cert.witness.unwrap().sets, vec![set(&[2]), set(&[1])]);
    }

    fn table_fn(n: usize) -> impl Strategy<Value = SetFunction> {
        prop::collection::vec(0i64..12, 1 << n).prop_map(move |raw| {
            SetFunction::from_fn(n, |a| {
                LatticeValue::Scalar(if a.is_empty() { int(0) } else { rat(raw[a.bits() as usize], 4) })
            })
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn minimal_k_is_least_passing_k(m in table_fn(4)) {
            match minimal_k(&m).unwrap() {
                Some(k) => {
                    prop_assert!(check_k_triangular(&m, &k).unwrap().is_k_triangular());
                    if k > Rational::zero() {
                        let below = &k * rat(99, 100);
                        prop_assert!(!check_k_triangular(&m, &below).unwrap().is_k_triangular());
                    }
                }
                None => {
                    prop_assert!(!check_k_triangular(&m, &int(1000)).unwrap().is_k_triangular());
                }
            }
        }

        #[test]
        fn first_witness_agrees_with_report(m in table_fn(4), k in 0i64..6, tiny in any::<bool>()) {
            let k = rat(k, 2);
            // a 10^-40 scale forces the big-rational path
            let m = if tiny { m.scaled(&(Rational::from_integer(BigInt::from(10).pow(40u32))).recip()).unwrap() } else { m };
            let report = check_k_triangular(&m, &k).unwrap();
            let witness = k_triangular_witness(&m, &k).unwrap();
            prop_assert_eq!(witness.is_none(), report.is_k_triangular());
            if let Some((a, b)) = witness {
                let (ma, mb, mu) = (m.eval(a), m.eval(b).scale(&k), m.eval(a.union(b)));
                prop_assert!(!mu.le(&(&ma + &mb)) || !ma.le(&(&mu + &mb)));
            }
        }

        #[test]
        fn minimal_k_bisection(m in table_fn(3)) {
            if let Some(k) = minimal_k(&m).unwrap() {
                let (mut lo, mut hi) = (Rational::zero(), int(64));
                for _ in 0..20 {
                    let mid = (&lo + &hi) / int(2);
                    if check_k_triangular(&m, &mid).unwrap().is_k_triangular() { hi = mid } else { lo = mid }
                }
                prop_assert!(lo <= k.clone() && k <= hi);
            }
        }

        #[test]
        fn scaling_covariance(m in table_fn(3), c in 1i64..9, d in 1i64..9, k in 0i64..3) {
            let c = rat(c, d);
            let scaled = m.scaled(&c).unwrap();
            let k = int(k);
            prop_assert_eq!(
                check_k_triangular(&m, &k).unwrap().is_k_triangular(),
                check_k_triangular(&scaled, &k).unwrap().is_k_triangular()
            );
        }

        #[test]
        fn chain_bis_follows(m in table_fn(5), parts in prop::collection::vec(0usize..4, 5)) {
            let mut sets = vec![AtomSet::EMPTY; 4];
            for (i, p) in parts.iter().enumerate() {
                sets[*p] = sets[*p].union(AtomSet::singleton(i + 1));
            }
            if let Some(k) = minimal_k(&m).unwrap() {
                let cert = finite_chain_check(&m, &sets, &k).unwrap();
                prop_assert!(cert.is_holds());
            }
        }
    }
}
