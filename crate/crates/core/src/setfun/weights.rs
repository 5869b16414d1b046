//! Closed-form weight rules `n ↦ w_n` with tail-bound oracles
//! `N ↦ bound on Σ_{n≥N} |w_n|`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::value::{int, parse_rational, rational_serde, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum WeightRule {
    /// `w_n = (-1)^n / n^p`.
    AlternatingPower {
        p: u32,
    },
    /// `w_n = q^n`.
    Geometric {
        #[serde(with = "rational_serde")]
        q: Rational,
    },
    Zero,
    /// `w_n = 1/n`; not absolutely summable, so it has no tail bound.
    Harmonic,
}

impl WeightRule {
    pub fn weight(&self, n: usize) -> Rational {
        assert!(n >= 1, "weights are indexed from 1");
        match self {
            WeightRule::AlternatingPower { p } => {
                let den = BigInt::from(n).pow(*p);
                let num = if n.is_multiple_of(2) { BigInt::one() } else { -BigInt::one() };
                Rational::new(num, den)
            }
            WeightRule::Geometric { q } => num_traits::pow(q.clone(), n),
            WeightRule::Zero => Rational::zero(),
            WeightRule::Harmonic => Rational::new(BigInt::one(), BigInt::from(n)),
        }
    }

    pub fn weights(&self, n: usize) -> Vec<Rational> {
        (1..=n).map(|i| self.weight(i)).collect()
    }

    /// Checks that the rule is absolutely summable with a closed-form tail.
    pub fn validate(&self) -> Result<()> {
        match self {
            WeightRule::AlternatingPower { p } if *p < 2 => Err(Error::NoTailBound(format!("sum of 1/n^{p} diverges"))),
            WeightRule::Geometric { q } if q.abs() >= Rational::one() => {
                Err(Error::NoTailBound(format!("geometric ratio {q} is not below 1 in modulus")))
            }
            WeightRule::Harmonic => Err(Error::NoTailBound("sum of 1/n diverges".into())),
            _ => Ok(()),
        }
    }

    /// Upper bound for `Σ_{n≥N} |w_n|`, non-increasing in `N`.
    ///
    /// For `1/n^p` the integral test gives `∫_{N-1}^∞ x^{-p} dx` when `N >= 2`
    /// and `1 + 1/(p-1)` at `N = 1`.
    pub fn tail_bound(&self, big_n: usize) -> Result<Rational> {
        self.validate()?;
        let big_n = big_n.max(1);
        Ok(match self {
            WeightRule::AlternatingPower { p } => {
                let pm1 = int(*p as i64 - 1);
                if big_n == 1 {
                    Rational::one() + pm1.recip()
                } else {
                    let base = Rational::from_integer(BigInt::from(big_n - 1));
                    (pm1 * num_traits::pow(base, (*p - 1) as usize)).recip()
                }
            }
            WeightRule::Geometric { q } => {
                let a = q.abs();
                num_traits::pow(a.clone(), big_n) / (Rational::one() - a)
            }
            WeightRule::Zero => Rational::zero(),
            WeightRule::Harmonic => unreachable!("rejected by validate"),
        })
    }

    /// Sum of `|w_n|` over all `n`.
    pub fn total_variation(&self) -> Result<Rational> {
        self.tail_bound(1)
    }
}

impl fmt::Display for WeightRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightRule::AlternatingPower { p } => write!(f, "alternating-power {p}"),
            WeightRule::Geometric { q } => write!(f, "geometric {q}"),
            WeightRule::Zero => f.write_str("zero"),
            WeightRule::Harmonic => f.write_str("harmonic"),
        }
    }
}

impl FromStr for WeightRule {
    type Err = Error;

    /// Parses `alternating-power 2`, `geometric 1/2`, `zero`, `harmonic`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let name = parts.next().unwrap_or("");
        let arg = parts.next();
        let rule = match (name, arg) {
            ("alternating-power", Some(p)) => {
                WeightRule::AlternatingPower { p: p.parse().map_err(|_| Error::Parse(format!("bad exponent {p:?}")))? }
            }
            ("geometric", Some(q)) => WeightRule::Geometric { q: parse_rational(q)? },
            ("zero", None) => WeightRule::Zero,
            ("harmonic", None) => WeightRule::Harmonic,
            _ => return Err(Error::Parse(format!("unknown weight rule {s:?}"))),
        };
        if parts.next().is_some() {
            return Err(Error::Parse(format!("trailing input in weight rule {s:?}")));
        }
        Ok(rule)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::value::rat;
    use num_traits::ToPrimitive;

    #[test]
    fn alternating_weights() {
        let r = WeightRule::AlternatingPower { p: 2 };
        assert_eq!(r.weights(3), vec![rat(-1, 1), rat(1, 4), rat(-1, 9)]);
        assert_eq!(r.tail_bound(1).unwrap(), rat(2, 1));
        assert_eq!(r.tail_bound(2).unwrap(), rat(1, 1));
        assert_eq!(r.tail_bound(5).unwrap(), rat(1, 4));
    }

    #[test]
    fn tail_bounds_dominate_exact_partial_tails() {
        let rules = [
            WeightRule::AlternatingPower { p: 2 },
            WeightRule::AlternatingPower { p: 3 },
            WeightRule::Geometric { q: rat(-1, 2) },
            WeightRule::Zero,
        ];
        let horizon = 300;
        for rule in &rules {
            let abs: Vec<Rational> = rule.weights(horizon).into_iter().map(|w| w.abs()).collect();
            let mut tail = Rational::zero();
            let mut prev = rule.tail_bound(horizon + 1).unwrap();
            for big_n in (1..=horizon).rev() {
                tail += &abs[big_n - 1];
                let bound = rule.tail_bound(big_n).unwrap();
                assert!(tail <= bound, "{rule} at {big_n}");
                assert!(prev <= bound, "{rule} not monotone at {big_n}");
                prev = bound;
            }
        }
    }

    #[test]
    fn tail_bounds_dominate_float_tails_to_ten_thousand() {
        let rule = WeightRule::AlternatingPower { p: 2 };
        let horizon = 10_000usize;
        let mut tail = 0.0f64;
        for big_n in (1..=horizon).rev() {
            tail += 1.0 / (big_n as f64 * big_n as f64);
            if big_n % 97 == 0 || big_n < 20 {
                assert!(tail <= rule.tail_bound(big_n).unwrap().to_f64().unwrap());
            }
        }
    }

    #[test]
    fn non_summable_rules_rejected() {
        assert!(matches!(WeightRule::Harmonic.tail_bound(3), Err(Error::NoTailBound(_))));
        assert!(WeightRule::AlternatingPower { p: 1 }.validate().is_err());
        assert!(WeightRule::Geometric { q: rat(1, 1) }.validate().is_err());
    }

    #[test]
    fn parse_roundtrip() {
        for s in ["alternating-power 2", "geometric -1/3", "zero", "harmonic"] {
            let r: WeightRule = s.parse().unwrap();
            assert_eq!(r.to_string().parse::<WeightRule>().unwrap(), r);
        }
        assert!("geometric".parse::<WeightRule>().is_err());
        let json = serde_json::to_string(&WeightRule::Geometric { q: rat(1, 2) }).unwrap();
        assert_eq!(json, r#"{"rule":"geometric","q":"1/2"}"#);
    }
}
