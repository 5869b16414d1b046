//! (O)-sequences, regulators ((D)-sequences) truncated at a finite horizon,
//! and index maps `φ: {1..T} → {1..L}`.

use serde::{Deserialize, Serialize};

use super::value::{Carrier, LatticeValue, Rational};
use crate::error::{Error, Result};

/// A non-increasing sequence of non-negative values, truncated at length `P`.
///
/// `tolerance` is the declared level the last term must reach for the
/// sequence to count as having infimum zero at the horizon (exact `0` by default).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OSequence {
    values: Vec<LatticeValue>,
    tolerance: LatticeValue,
}

impl OSequence {
    pub fn new(values: Vec<LatticeValue>) -> Result<Self> {
        let first = values.first().ok_or(Error::EmptyInput("o-sequence"))?;
        let tolerance = LatticeValue::zero(first.carrier());
        Self::with_tolerance(values, tolerance)
    }

    pub fn with_tolerance(values: Vec<LatticeValue>, tolerance: LatticeValue) -> Result<Self> {
        let first = values.first().ok_or(Error::EmptyInput("o-sequence"))?;
        let carrier = first.carrier();
        tolerance.check_carrier(carrier)?;
        for (p, v) in values.iter().enumerate() {
            v.check_carrier(carrier)?;
            if !v.is_nonnegative() {
                return Err(Error::InvalidSequence(format!("term {} is negative: {v}", p + 1)));
            }
            if p > 0 && !v.le(&values[p - 1]) {
                return Err(Error::InvalidSequence(format!("term {} increases: {v}", p + 1)));
            }
        }
        Ok(OSequence { values, tolerance })
    }

    pub fn values(&self) -> &[LatticeValue] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn carrier(&self) -> Carrier {
        self.values[0].carrier()
    }

    pub fn tolerance(&self) -> &LatticeValue {
        &self.tolerance
    }

    /// 1-based access.
    pub fn term(&self, p: usize) -> &LatticeValue {
        &self.values[p - 1]
    }

    /// Whether the last term has reached the declared tolerance.
    pub fn is_null_at_horizon(&self) -> bool {
        self.values.last().expect("non-empty").le(&self.tolerance)
    }
}

/// `φ: {1..T} → ℕ`, stored 1-based in both domain and range.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexMap(Vec<usize>);

impl IndexMap {
    pub fn new(values: Vec<usize>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("index map"));
        }
        if values.contains(&0) {
            return Err(Error::DimensionMismatch("index map values are 1-based".into()));
        }
        Ok(IndexMap(values))
    }

    pub fn constant(len: usize, l: usize) -> Self {
        IndexMap(vec![l.max(1); len.max(1)])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `φ(t)`, 1-based.
    pub fn at(&self, t: usize) -> usize {
        self.0[t - 1]
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    /// `t ↦ φ(t + n)`.
    pub fn shifted(&self, n: usize) -> IndexMap {
        IndexMap(self.0[n.min(self.0.len())..].to_vec())
    }

    pub fn max_value(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// Pointwise `self <= other` on the common domain.
    pub fn pointwise_le(&self, other: &IndexMap) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

/// A truncated (D)-sequence: a `T × L` matrix whose rows are (O)-sequences in `l`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RegulatorRecord", into = "RegulatorRecord")]
pub struct Regulator {
    entries: Vec<Vec<LatticeValue>>,
    bound: LatticeValue,
    tolerance: LatticeValue,
}

/// On-disk form; carries its horizon explicitly.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegulatorRecord {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<LatticeValue>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<LatticeValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<LatticeValue>,
}

impl TryFrom<RegulatorRecord> for Regulator {
    type Error = Error;

    fn try_from(r: RegulatorRecord) -> Result<Self> {
        if r.entries.len() != r.rows || r.entries.iter().any(|row| row.len() != r.cols) {
            return Err(Error::DimensionMismatch(format!(
                "regulator record declares {}x{} but entries disagree",
                r.rows, r.cols
            )));
        }
        let mut reg = match r.bound {
            Some(b) => Regulator::with_bound(r.entries, b)?,
            None => Regulator::new(r.entries)?,
        };
        if let Some(t) = r.tolerance {
            t.check_carrier(reg.carrier())?;
            reg.tolerance = t;
        }
        Ok(reg)
    }
}

impl From<Regulator> for RegulatorRecord {
    fn from(r: Regulator) -> Self {
        RegulatorRecord {
            rows: r.rows(),
            cols: r.cols(),
            entries: r.entries,
            bound: Some(r.bound),
            tolerance: Some(r.tolerance),
        }
    }
}

impl Regulator {
    /// Validates the matrix; the bound is the join of all entries.
    pub fn new(entries: Vec<Vec<LatticeValue>>) -> Result<Self> {
        let first = entries.first().and_then(|r| r.first()).ok_or(Error::EmptyInput("regulator"))?;
        let bound = LatticeValue::join_all(entries.iter().flatten()).unwrap_or_else(|| first.clone());
        Self::with_bound(entries, bound)
    }

    pub fn with_bound(entries: Vec<Vec<LatticeValue>>, bound: LatticeValue) -> Result<Self> {
        let cols = entries.first().map(Vec::len).unwrap_or(0);
        if cols == 0 {
            return Err(Error::EmptyInput("regulator"));
        }
        let carrier = entries[0][0].carrier();
        bound.check_carrier(carrier)?;
        for (t, row) in entries.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {} has {} columns, expected {cols}",
                    t + 1,
                    row.len()
                )));
            }
            for (l, v) in row.iter().enumerate() {
                v.check_carrier(carrier)?;
                if !v.is_nonnegative() {
                    return Err(Error::InvalidRegulator(format!("entry ({}, {}) is negative", t + 1, l + 1)));
                }
                if l > 0 && !v.le(&row[l - 1]) {
                    return Err(Error::InvalidRegulator(format!("row {} increases at column {}", t + 1, l + 1)));
                }
                if !v.le(&bound) {
                    return Err(Error::InvalidRegulator(format!("entry ({}, {}) exceeds the bound", t + 1, l + 1)));
                }
            }
        }
        let tolerance = LatticeValue::zero(carrier);
        Ok(Regulator { entries, bound, tolerance })
    }

    pub fn zero(carrier: Carrier, rows: usize, cols: usize) -> Self {
        let z = LatticeValue::zero(carrier);
        Regulator { entries: vec![vec![z.clone(); cols.max(1)]; rows.max(1)], bound: z.clone(), tolerance: z }
    }

    /// Rows all equal to `row(l)`, `l = 1..=cols`.
    pub fn from_rule(rows: usize, cols: usize, rule: impl Fn(usize, usize) -> LatticeValue) -> Result<Self> {
        let entries = (1..=rows.max(1)).map(|t| (1..=cols.max(1)).map(|l| rule(t, l)).collect()).collect();
        Regulator::new(entries)
    }

    pub fn with_tolerance(mut self, tolerance: LatticeValue) -> Result<Self> {
        tolerance.check_carrier(self.carrier())?;
        self.tolerance = tolerance;
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries[0].len()
    }

    pub fn carrier(&self) -> Carrier {
        self.bound.carrier()
    }

    pub fn bound(&self) -> &LatticeValue {
        &self.bound
    }

    pub fn tolerance(&self) -> &LatticeValue {
        &self.tolerance
    }

    /// `a_{t,l}`, 1-based.
    pub fn entry(&self, t: usize, l: usize) -> &LatticeValue {
        &self.entries[t - 1][l - 1]
    }

    pub fn entries(&self) -> &[Vec<LatticeValue>] {
        &self.entries
    }

    /// Row `t` as an (O)-sequence (carrying the regulator's tolerance).
    pub fn row(&self, t: usize) -> OSequence {
        OSequence::with_tolerance(self.entries[t - 1].clone(), self.tolerance.clone())
            .expect("rows validated on construction")
    }

    /// Every row reaches the tolerance in its last column.
    pub fn is_null_at_horizon(&self) -> bool {
        self.entries.iter().all(|row| row.last().expect("non-empty").le(&self.tolerance))
    }

    /// `(c · a_{t,l})` for `c >= 0`.
    pub fn scaled(&self, c: &Rational) -> Regulator {
        let f = |v: &LatticeValue| v.scale(c);
        Regulator {
            entries: self.entries.iter().map(|row| row.iter().map(f).collect()).collect(),
            bound: f(&self.bound),
            tolerance: f(&self.tolerance),
        }
    }

    /// Extends to `rows × cols`: new rows are zero, new columns repeat the last
    /// column (an upper bound for the untruncated terms).
    pub fn padded(&self, rows: usize, cols: usize) -> Regulator {
        let carrier = self.carrier();
        let cols = cols.max(self.cols());
        let mut entries: Vec<Vec<LatticeValue>> = self
            .entries
            .iter()
            .map(|row| {
                let mut row = row.clone();
                let last = row.last().expect("non-empty").clone();
                row.resize(cols, last);
                row
            })
            .collect();
        entries.resize(rows.max(self.rows()), vec![LatticeValue::zero(carrier); cols]);
        Regulator { entries, bound: self.bound.clone(), tolerance: self.tolerance.clone() }
    }

    /// Entrywise sum of two regulators of the same shape.
    pub fn sum(&self, other: &Regulator) -> Result<Regulator> {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return Err(Error::DimensionMismatch(format!(
                "cannot add {}x{} and {}x{} regulators",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        other.bound.check_carrier(self.carrier())?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Ok(Regulator { entries, bound: &self.bound + &other.bound, tolerance: &self.tolerance + &other.tolerance })
    }
}

/// `⋁_{t=1..T} a_{t, φ(t)}`: the finite truncation of the supremum along `φ`.
pub fn regulator_sup(reg: &Regulator, phi: &IndexMap) -> Result<LatticeValue> {
    if phi.len() < reg.rows() {
        return Err(Error::DimensionMismatch(format!(
            "index map has {} entries but the regulator has {} rows",
            phi.len(),
            reg.rows()
        )));
    }
    let mut acc: Option<LatticeValue> = None;
    for t in 1..=reg.rows() {
        let l = phi.at(t);
        if l > reg.cols() {
            return Err(Error::DimensionMismatch(format!("φ({t}) = {l} exceeds {} columns", reg.cols())));
        }
        let v = reg.entry(t, l);
        acc = Some(match acc {
            None => v.clone(),
            Some(a) => a.join(v),
        });
    }
    Ok(acc.expect("at least one row"))
}

/// The constant-row regulator `a_{t,l} := σ_l` with `rows` rows.
pub fn regulator_from_o_sequence(sigma: &OSequence, rows: usize) -> Regulator {
    let row = sigma.values().to_vec();
    Regulator {
        entries: vec![row; rows.max(1)],
        bound: sigma.values()[0].clone(),
        tolerance: sigma.tolerance().clone(),
    }
}

/// One level of the converse construction: the map `φ_p` and `σ_p = ⋁_t a_{t,φ_p(t)}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OLevel {
    pub sigma: LatticeValue,
    pub phi: IndexMap,
}

/// For each target, `φ_p(t)` is the first column where row `t` drops to the
/// target and `σ_p` the resulting supremum, so `σ_p <= target_p`.
pub fn o_sequence_from_regulator(reg: &Regulator, targets: &[LatticeValue]) -> Result<Vec<OLevel>> {
    if targets.is_empty() {
        return Err(Error::EmptyInput("targets"));
    }
    for (p, target) in targets.iter().enumerate() {
        target.check_carrier(reg.carrier())?;
        if p > 0 && (!target.le(&targets[p - 1]) || *target == targets[p - 1]) {
            return Err(Error::InvalidSequence(format!("targets must strictly decrease (term {})", p + 1)));
        }
    }
    targets
        .iter()
        .map(|target| {
            let phi = (1..=reg.rows())
                .map(|t| {
                    (1..=reg.cols())
                        .find(|&l| reg.entry(t, l).le(target))
                        .ok_or_else(|| Error::NoSuchColumn { row: t, target: target.to_string() })
                })
                .collect::<Result<Vec<_>>>()?;
            let phi = IndexMap::new(phi)?;
            let sigma = regulator_sup(reg, &phi)?;
            Ok(OLevel { sigma, phi })
        })
        .collect()
}
