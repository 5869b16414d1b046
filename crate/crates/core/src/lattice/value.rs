//! Exact lattice-group values: rational scalars and fixed-dimension rational
//! vectors under the componentwise order.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p/q`, `p` or `-p/q`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
    let den: BigInt = den.parse().map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(num, den))
}

/// Machine form: always `p/q`, reduced, denominator positive.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Decimal approximation for human-facing tables only.
pub fn approx(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Carrier {
    Scalar,
    Vector(usize),
}

impl fmt::Display for Carrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Carrier::Scalar => f.write_str("scalar"),
            Carrier::Vector(d) => write!(f, "vector[{d}]"),
        }
    }
}

/// An element of a concrete Dedekind complete lattice group.
///
/// Binary operations between values of different carriers panic; containers
/// validate carriers on construction so that internal arithmetic never mixes them.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LatticeValue {
    Scalar(Rational),
    Vector(Vec<Rational>),
}

impl LatticeValue {
    pub fn zero(carrier: Carrier) -> Self {
        match carrier {
            Carrier::Scalar => LatticeValue::Scalar(Rational::zero()),
            Carrier::Vector(d) => LatticeValue::Vector(vec![Rational::zero(); d]),
        }
    }

    pub fn scalar(r: Rational) -> Self {
        LatticeValue::Scalar(r)
    }

    pub fn carrier(&self) -> Carrier {
        match self {
            LatticeValue::Scalar(_) => Carrier::Scalar,
            LatticeValue::Vector(v) => Carrier::Vector(v.len()),
        }
    }

    pub fn as_scalar(&self) -> Option<&Rational> {
        match self {
            LatticeValue::Scalar(r) => Some(r),
            LatticeValue::Vector(_) => None,
        }
    }

    pub fn components(&self) -> &[Rational] {
        match self {
            LatticeValue::Scalar(r) => std::slice::from_ref(r),
            LatticeValue::Vector(v) => v,
        }
    }

    pub fn check_carrier(&self, expected: Carrier) -> Result<()> {
        if self.carrier() == expected {
            Ok(())
        } else {
            Err(Error::CarrierMismatch { expected: expected.to_string(), found: self.carrier().to_string() })
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Rational, &Rational) -> Rational) -> Self {
        match (self, other) {
            (LatticeValue::Scalar(a), LatticeValue::Scalar(b)) => LatticeValue::Scalar(f(a, b)),
            (LatticeValue::Vector(a), LatticeValue::Vector(b)) if a.len() == b.len() => {
                LatticeValue::Vector(a.iter().zip(b).map(|(x, y)| f(x, y)).collect())
            }
            _ => panic!("carrier mismatch: {} vs {}", self.carrier(), other.carrier()),
        }
    }

    fn map(&self, f: impl Fn(&Rational) -> Rational) -> Self {
        match self {
            LatticeValue::Scalar(a) => LatticeValue::Scalar(f(a)),
            LatticeValue::Vector(a) => LatticeValue::Vector(a.iter().map(f).collect()),
        }
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Self) -> bool {
        match (self, other) {
            (LatticeValue::Scalar(a), LatticeValue::Scalar(b)) => a <= b,
            (LatticeValue::Vector(a), LatticeValue::Vector(b)) if a.len() == b.len() => {
                a.iter().zip(b).all(|(x, y)| x <= y)
            }
            _ => panic!("carrier mismatch: {} vs {}", self.carrier(), other.carrier()),
        }
    }

    pub fn join(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| if a >= b { a.clone() } else { b.clone() })
    }

    pub fn meet(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| if a <= b { a.clone() } else { b.clone() })
    }

    /// `|x| = x ∨ (−x)`.
    pub fn abs(&self) -> Self {
        self.map(|a| a.abs())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map(|a| a * c)
    }

    pub fn is_zero(&self) -> bool {
        self.components().iter().all(Zero::is_zero)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.components().iter().all(|c| !c.is_negative())
    }

    /// Join of a non-empty iterator; `None` when empty.
    pub fn join_all<'a, I: IntoIterator<Item = &'a LatticeValue>>(values: I) -> Option<LatticeValue> {
        let mut it = values.into_iter();
        let first = it.next()?.clone();
        Some(it.fold(first, |acc, v| acc.join(v)))
    }

    pub fn sum_all<'a, I: IntoIterator<Item = &'a LatticeValue>>(carrier: Carrier, values: I) -> LatticeValue {
        values.into_iter().fold(LatticeValue::zero(carrier), |acc, v| &acc + v)
    }

    /// Short human rendering with decimal approximations.
    pub fn approx_string(&self) -> String {
        match self {
            LatticeValue::Scalar(r) => format!("{:.6}", approx(r)),
            LatticeValue::Vector(v) => {
                let parts: Vec<_> = v.iter().map(|r| format!("{:.6}", approx(r))).collect();
                format!("({})", parts.join(", "))
            }
        }
    }
}

impl From<Rational> for LatticeValue {
    fn from(r: Rational) -> Self {
        LatticeValue::Scalar(r)
    }
}

impl Add for &LatticeValue {
    type Output = LatticeValue;
    fn add(self, rhs: &LatticeValue) -> LatticeValue {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Add for LatticeValue {
    type Output = LatticeValue;
    fn add(self, rhs: LatticeValue) -> LatticeValue {
        &self + &rhs
    }
}

impl Sub for &LatticeValue {
    type Output = LatticeValue;
    fn sub(self, rhs: &LatticeValue) -> LatticeValue {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &LatticeValue {
    type Output = LatticeValue;
    fn neg(self) -> LatticeValue {
        self.map(|a| -a)
    }
}

impl fmt::Display for LatticeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeValue::Scalar(r) => f.write_str(&format_rational(r)),
            LatticeValue::Vector(v) => {
                f.write_str("(")?;
                for (i, r) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    f.write_str(&format_rational(r))?;
                }
                f.write_str(")")
            }
        }
    }
}

impl Serialize for LatticeValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            LatticeValue::Scalar(r) => serializer.serialize_str(&format_rational(r)),
            LatticeValue::Vector(v) => serializer.collect_seq(v.iter().map(format_rational)),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawValue {
    Scalar(String),
    Vector(Vec<String>),
}

impl<'de> Deserialize<'de> for LatticeValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        match RawValue::deserialize(deserializer)? {
            RawValue::Scalar(s) => parse_rational(&s).map(LatticeValue::Scalar).map_err(serde::de::Error::custom),
            RawValue::Vector(v) => v
                .iter()
                .map(|s| parse_rational(s))
                .collect::<Result<Vec<_>>>()
                .map(LatticeValue::Vector)
                .map_err(serde::de::Error::custom),
        }
    }
}

/// Serde adapter for bare rationals as `p/q` strings.
pub mod rational_serde {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

pub mod rational_vec_serde {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| parse_rational(s)).collect::<Result<_>>().map_err(serde::de::Error::custom)
    }
}

pub mod opt_rational_serde {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(r) => rational_serde::serialize(r, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?.map(|s| parse_rational(&s).map_err(serde::de::Error::custom)).transpose()
    }
}

pub fn one() -> Rational {
    Rational::one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vec_value() -> impl Strategy<Value = LatticeValue> {
        proptest::collection::vec((-50i64..50, 1i64..12), 3)
            .prop_map(|v| LatticeValue::Vector(v.into_iter().map(|(n, d)| rat(n, d)).collect()))
    }

    fn scalar_value() -> impl Strategy<Value = LatticeValue> {
        (-50i64..50, 1i64..12).prop_map(|(n, d)| LatticeValue::Scalar(rat(n, d)))
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("10/9").unwrap(), rat(10, 9));
        assert_eq!(parse_rational("-4/6").unwrap(), rat(-2, 3));
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert_eq!(format_rational(&int(3)), "3/1");
        assert_eq!(format_rational(&rat(-2, 4)), "-1/2");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn serde_roundtrip_forms() {
        let v = LatticeValue::Vector(vec![rat(1, 2), int(0)]);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"["1/2","0/1"]"#);
        assert_eq!(serde_json::from_str::<LatticeValue>(&s).unwrap(), v);
        let x: LatticeValue = serde_json::from_str(r#""31/36""#).unwrap();
        assert_eq!(x, LatticeValue::Scalar(rat(31, 36)));
    }

    #[test]
    fn vector_order_is_partial() {
        let a = LatticeValue::Vector(vec![int(1), int(0)]);
        let b = LatticeValue::Vector(vec![int(0), int(1)]);
        assert!(!a.le(&b) && !b.le(&a));
        assert_eq!(a.join(&b), LatticeValue::Vector(vec![int(1), int(1)]));
        assert_eq!(a.meet(&b), LatticeValue::zero(Carrier::Vector(2)));
    }

    #[test]
    #[should_panic(expected = "carrier mismatch")]
    fn mixing_carriers_panics() {
        let _ = LatticeValue::Scalar(int(1)).join(&LatticeValue::Vector(vec![int(1)]));
    }

    proptest! {
        #[test]
        fn lattice_laws_vector(a in vec_value(), b in vec_value(), c in vec_value()) {
            prop_assert_eq!(a.join(&b), b.join(&a));
            prop_assert_eq!(a.meet(&b), b.meet(&a));
            prop_assert_eq!(a.join(&b).join(&c), a.join(&b.join(&c)));
            prop_assert_eq!(a.meet(&b).meet(&c), a.meet(&b.meet(&c)));
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a + &b, &b + &a);
            // translation invariance of the order
            prop_assert_eq!(a.le(&b), (&a + &c).le(&(&b + &c)));
            prop_assert_eq!(a.abs(), a.join(&-&a));
            prop_assert!(a.meet(&b).le(&a) && a.le(&a.join(&b)));
        }

        #[test]
        fn lattice_laws_scalar(a in scalar_value(), b in scalar_value(), c in scalar_value()) {
            prop_assert_eq!(a.join(&b).join(&c), a.join(&b.join(&c)));
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert!(a.le(&b) || b.le(&a));
            // |x + y| <= |x| + |y|
            prop_assert!((&a + &b).abs().le(&(&a.abs() + &b.abs())));
            // distributivity: a ∧ (b ∨ c) = (a ∧ b) ∨ (a ∧ c)
            prop_assert_eq!(a.meet(&b.join(&c)), a.meet(&b).join(&a.meet(&c)));
        }
    }
}
