//! Deterministic fixture generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::atoms::AtomSet;
use crate::error::{Error, Result};
use crate::lattice::regulator::Regulator;
use crate::lattice::value::{int, rat, rational_serde, rational_vec_serde, Carrier, LatticeValue, Rational};
use crate::limits::SetFunctionFamily;
use crate::setfun::{is_k_subadditive, k_triangular_witness, SetFunction, WeightRule};

/// Largest ground set for the random generator (its acceptance test is exhaustive).
pub const MAX_RANDOM_ATOMS: usize = 8;
pub const REJECTION_BUDGET: usize = 10_000;

/// `μ(A) = |Σ_{n∈A} (-1)^n/n²|` on `n` atoms.
pub fn gen_measuroid(n: usize) -> Result<SetFunction> {
    SetFunction::from_rule(&WeightRule::AlternatingPower { p: 2 }, n)
}

/// Scales `s_j` of a scaled family, with their limit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum ScaleRule {
    /// `1 + 1/j`.
    OnePlusInverse,
    /// `2 - 1/j`.
    TwoMinusInverse,
    Constant {
        #[serde(with = "rational_serde")]
        c: Rational,
    },
    Explicit {
        #[serde(with = "rational_vec_serde")]
        scales: Vec<Rational>,
        #[serde(with = "rational_serde")]
        limit: Rational,
    },
}

impl ScaleRule {
    pub fn scale(&self, j: usize) -> Rational {
        match self {
            ScaleRule::OnePlusInverse => int(1) + rat(1, j as i64),
            ScaleRule::TwoMinusInverse => int(2) - rat(1, j as i64),
            ScaleRule::Constant { c } => c.clone(),
            ScaleRule::Explicit { scales, .. } => scales[j - 1].clone(),
        }
    }

    pub fn limit(&self) -> Rational {
        match self {
            ScaleRule::OnePlusInverse => int(1),
            ScaleRule::TwoMinusInverse => int(2),
            ScaleRule::Constant { c } => c.clone(),
            ScaleRule::Explicit { limit, .. } => limit.clone(),
        }
    }
}

/// `m_j = s_j·m` for `j = 1..members`, declared limit `(lim s)·m`, and
/// convergence regulator `σ_l = max_{i≥l} |s_i - lim|·bound(m)`.
pub fn gen_scaled_family(m: &SetFunction, scales: &ScaleRule, members: usize) -> Result<SetFunctionFamily> {
    if members == 0 {
        return Err(Error::EmptyInput("family members"));
    }
    if let ScaleRule::Explicit { scales, .. } = scales {
        if scales.len() < members {
            return Err(Error::DimensionMismatch(format!("{} scales for {members} members", scales.len())));
        }
    }
    let lim = scales.limit();
    let all: Vec<Rational> = (1..=members).map(|j| scales.scale(j)).collect();
    if let Some(bad) = all.iter().chain([&lim]).find(|s| **s <= int(0)) {
        return Err(Error::InvalidSetFunction(format!("scale {bad} is not positive")));
    }
    let fs = all.iter().map(|s| m.scaled(s)).collect::<Result<Vec<_>>>()?;
    let mut sigma = vec![LatticeValue::zero(m.carrier()); members];
    let mut run = int(0);
    for l in (0..members).rev() {
        run = run.max(num_traits::Signed::abs(&(&all[l] - &lim)));
        sigma[l] = m.bound().scale(&run);
    }
    let reg = Regulator::new(vec![sigma])?;
    let limit = if lim == int(1) { m.clone() } else { m.scaled(&lim)? };
    SetFunctionFamily::new(fs, Some(limit), Some(reg))
}

/// `m_j(A) = 1` if `humps[j] ⊂ A`, else 0, with declared limit `0` and
/// regulator `1/l`. Humps must be disjoint singletons: a larger hump makes
/// `m_j` fail 1-subadditivity on its own atoms.
pub fn gen_hump_family(n: usize, humps: &[AtomSet]) -> Result<SetFunctionFamily> {
    if humps.is_empty() {
        return Err(Error::EmptyInput("humps"));
    }
    for (i, h) in humps.iter().enumerate() {
        if let Some(c) = humps[..i].iter().find(|c| !c.is_disjoint(*h)) {
            return Err(Error::NotDisjoint { first: *c, second: *h });
        }
        if h.len() != 1 {
            return Err(Error::InvalidSetFunction(format!(
                "hump {h} is not a singleton, so its indicator is not 1-triangular"
            )));
        }
    }
    let members = humps
        .iter()
        .map(|h| {
            let m = SetFunction::from_fn(n, |a| LatticeValue::Scalar(int(h.is_subset(a) as i64)))?;
            if k_triangular_witness(&m, &int(1))?.is_some() {
                return Err(Error::InvalidSetFunction(format!("hump {h} is not 1-triangular")));
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    let reg = Regulator::from_rule(1, humps.len(), |_, l| LatticeValue::Scalar(rat(1, l as i64)))?;
    SetFunctionFamily::new(members, Some(SetFunction::zero(n, Carrier::Scalar)?), Some(reg))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomDraw {
    pub function: SetFunction,
    /// Candidates drawn, the accepted one included.
    pub attempts: usize,
}

/// A positive `m` with `m(∅) = 0` and values in `[0, bound]`, accepted only
/// after an exhaustive k-subadditivity check. Candidates alternate between
/// uniform values, values in `[bound/(1+k), bound]`, and `|signed measures|`.
/// For `k < 1` the pair `(∅, B)` forces `m(B) <= k·m(B)`, so only `m ≡ 0`
/// qualifies; it is returned directly.
pub fn gen_random_ksubadditive(n: usize, k: &Rational, bound: &Rational, seed: u64) -> Result<RandomDraw> {
    if n > MAX_RANDOM_ATOMS {
        return Err(Error::TooLarge { what: "random generator atoms", n, max: MAX_RANDOM_ATOMS });
    }
    if *k < int(0) || *bound < int(0) {
        return Err(Error::InvalidSetFunction("k and bound must be non-negative".into()));
    }
    if *k < int(1) || *bound == int(0) {
        return Ok(RandomDraw { function: SetFunction::zero(n, Carrier::Scalar)?, attempts: 1 });
    }
    const DEN: i64 = 60;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let floor = (DEN as f64 / (1.0 + num_traits::ToPrimitive::to_f64(k).unwrap_or(1.0))).ceil() as i64;
    for attempt in 1..=REJECTION_BUDGET {
        let size = 1usize << n;
        let values: Vec<Rational> = match attempt % 3 {
            1 => (0..size).map(|_| rat(rng.random_range(0..=DEN), DEN)).collect(),
            2 => (0..size).map(|_| rat(rng.random_range(floor.min(DEN)..=DEN), DEN)).collect(),
            _ => {
                let w: Vec<i64> = (0..n).map(|_| rng.random_range(-DEN..=DEN)).collect();
                let total = w.iter().map(|x| x.abs()).sum::<i64>().max(1);
                (0..size)
                    .map(|mask| {
                        let s: i64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| w[i]).sum();
                        rat(s.abs(), total)
                    })
                    .collect()
            }
        };
        let table = values
            .into_iter()
            .enumerate()
            .map(|(mask, v)| LatticeValue::Scalar(if mask == 0 { int(0) } else { v * bound }))
            .collect();
        let m = SetFunction::from_table(n, table)?;
        if is_k_subadditive(&m, k)? {
            return Ok(RandomDraw { function: m, attempts: attempt });
        }
    }
    Err(Error::RejectionBudgetExhausted { budget: REJECTION_BUDGET })
}
