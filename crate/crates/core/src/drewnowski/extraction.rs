//! First-fit extraction of a subsequence `(C_{n_h})_h` along whose tail
//! unions the semivariation is certified below `b_h`.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::countable::{derived_targets, CountableSetFunction, EXACT_LIMIT};
use crate::error::{Error, Result};
use crate::lattice::convergence::{Certificate, Horizon, Witness};
use crate::lattice::value::{rational_serde, rational_vec_serde, LatticeValue, Rational};

/// Disjoint sequence `h ↦ C_h ⊂ ℕ` with `max C_h < min C_{h+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum DisjointRule {
    /// `C_h = {h}`.
    Singletons,
    /// `C_h = {(h-1)w+1, …, hw}`.
    Intervals { width: u64 },
    /// `C_h = {f·h}`.
    Multiples { factor: u64 },
}

impl DisjointRule {
    pub fn validate(&self) -> Result<()> {
        match self {
            DisjointRule::Intervals { width: 0 } | DisjointRule::Multiples { factor: 0 } => {
                Err(Error::InvalidSequence(format!("{self} needs a positive parameter")))
            }
            _ => Ok(()),
        }
    }

    /// Elements of `C_h` in increasing order; `None` past `u64`.
    pub fn set(&self, h: u64) -> Option<Vec<u64>> {
        match self {
            DisjointRule::Singletons => Some(vec![h]),
            DisjointRule::Intervals { width } => {
                let lo = (h - 1).checked_mul(*width)?.checked_add(1)?;
                let hi = h.checked_mul(*width)?;
                Some((lo..=hi).collect())
            }
            DisjointRule::Multiples { factor } => Some(vec![h.checked_mul(*factor)?]),
        }
    }
}

impl fmt::Display for DisjointRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DisjointRule::Singletons => f.write_str("singletons"),
            DisjointRule::Intervals { width } => write!(f, "intervals {width}"),
            DisjointRule::Multiples { factor } => write!(f, "multiples {factor}"),
        }
    }
}

impl FromStr for DisjointRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let name = parts.next().unwrap_or_default();
        let mut arg = || -> Result<u64> {
            parts
                .next()
                .ok_or_else(|| Error::Parse(format!("{name} needs a parameter")))?
                .parse()
                .map_err(|e| Error::Parse(format!("{name}: {e}")))
        };
        let rule = match name {
            "singletons" => DisjointRule::Singletons,
            "intervals" => DisjointRule::Intervals { width: arg()? },
            "multiples" => DisjointRule::Multiples { factor: arg()? },
            other => return Err(Error::Parse(format!("unknown sequence rule {other:?}"))),
        };
        rule.validate()?;
        Ok(rule)
    }
}

/// Index stream `{start + i·step : i >= 0}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Block {
    pub start: u64,
    pub step: u64,
}

impl Block {
    pub const ALL: Block = Block { start: 1, step: 1 };

    /// Sub-block `r >= 1`: positions `i` with `i + 1` of 2-adic valuation `r - 1`.
    /// The sub-blocks partition the block.
    pub fn sub_block(self, r: u32) -> Option<Block> {
        let half = 1u64.checked_shl(r - 1)?;
        let step = self.step.checked_mul(half.checked_mul(2)?)?;
        let start = self.start.checked_add(self.step.checked_mul(half - 1)?)?;
        Some(Block { start, step })
    }

    pub fn contains(self, h: u64) -> bool {
        h >= self.start && (h - self.start).is_multiple_of(self.step)
    }

    pub fn is_sub_block_of(self, parent: Block) -> bool {
        parent.contains(self.start) && self.step.is_multiple_of(parent.step)
    }

    /// Smallest member exceeding `after`.
    pub fn first_after(self, after: u64) -> Option<u64> {
        if self.start > after {
            return Some(self.start);
        }
        let i = (after - self.start) / self.step + 1;
        self.start.checked_add(i.checked_mul(self.step)?)
    }

    pub fn iter(self) -> impl Iterator<Item = u64> {
        (0u64..).map_while(move |i| i.checked_mul(self.step).and_then(|o| o.checked_add(self.start)))
    }

    pub fn prefix(self, len: usize) -> Vec<u64> {
        self.iter().take(len).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionConfig {
    /// Largest sub-block index tried per level.
    pub width: u32,
    /// Elements of a union weighed exactly before the tail oracle takes over.
    pub prefix_cap: usize,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig { width: 64, prefix_cap: 64 }
    }
}

/// `v(m)(U) <= prefix + tail` for an infinite union `U`: the exact semivariation
/// of the first elements plus the tail oracle from the first element left out.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockBound {
    #[serde(with = "rational_serde")]
    pub prefix: Rational,
    pub tail_from: u64,
    #[serde(with = "rational_serde")]
    pub tail: Rational,
    #[serde(with = "rational_serde")]
    pub attained: Rational,
}

/// Certifies `v(m)` of the union of the sets indexed by `indices`, which must be increasing.
pub fn certify_union(
    m: &CountableSetFunction,
    seq: &DisjointRule,
    indices: impl Iterator<Item = u64>,
    prefix_cap: usize,
) -> BlockBound {
    let mut prefix = Vec::with_capacity(prefix_cap);
    let mut tail_from = u64::MAX;
    'outer: for h in indices {
        let Some(set) = seq.set(h) else { break };
        for n in set {
            if prefix.len() >= prefix_cap || n >= EXACT_LIMIT {
                tail_from = n;
                break 'outer;
            }
            prefix.push(n);
        }
    }
    let exact = m.semivariation(&prefix);
    let tail = if tail_from == u64::MAX && prefix.len() < prefix_cap {
        // every representable index was weighed; the rest lies past u64
        m.tail_bound(u64::MAX)
    } else {
        m.tail_bound(tail_from)
    };
    BlockBound { attained: &exact + &tail, prefix: exact, tail_from, tail }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionLevel {
    pub level: usize,
    /// Sub-block index `r_l` chosen first-fit.
    pub sub_block: u32,
    pub block: Block,
    pub block_prefix: Vec<u64>,
    #[serde(with = "rational_serde")]
    pub target: Rational,
    /// One bound per set function.
    pub bounds: Vec<BlockBound>,
    /// `n_l`: first element of the block beyond `n_{l-1}`.
    pub index: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionTrace {
    pub functions: Vec<CountableSetFunction>,
    pub sequence: DisjointRule,
    #[serde(with = "rational_vec_serde")]
    pub targets: Vec<Rational>,
    pub config: ExtractionConfig,
    pub levels: Vec<ExtractionLevel>,
    pub output_indices: Vec<u64>,
}

impl ExtractionTrace {
    pub fn last_block(&self) -> Block {
        self.levels.last().map_or(Block::ALL, |l| l.block)
    }
}

fn check_targets(targets: &[Rational]) -> Result<()> {
    if targets.is_empty() {
        return Err(Error::EmptyInput("targets"));
    }
    for (i, t) in targets.iter().enumerate() {
        if *t < Rational::zero() || (i > 0 && *t > targets[i - 1]) {
            return Err(Error::InvalidSequence(format!(
                "targets must be non-negative and non-increasing (term {})",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Single-function extraction; `targets` default to [`derived_targets`] at `levels`.
pub fn extract_continuous_subsequence(
    m: &CountableSetFunction,
    seq: &DisjointRule,
    levels: usize,
    targets: Option<Vec<Rational>>,
    config: &ExtractionConfig,
) -> Result<ExtractionTrace> {
    extract(std::slice::from_ref(m), seq, levels, targets, config)
}

/// Extraction for an equibounded family: every level's block certifies every
/// member at once, so one nested chain serves all of them.
pub fn extract_for_family(
    ms: &[CountableSetFunction],
    seq: &DisjointRule,
    levels: usize,
    u: &Rational,
    targets: Option<Vec<Rational>>,
    config: &ExtractionConfig,
) -> Result<ExtractionTrace> {
    for (j, m) in ms.iter().enumerate() {
        if m.total_variation() > *u {
            return Err(Error::InvalidSetFunction(format!(
                "member {} has total variation {} above the equibound {u}",
                j + 1,
                m.total_variation()
            )));
        }
    }
    extract(ms, seq, levels, targets, config)
}

fn extract(
    ms: &[CountableSetFunction],
    seq: &DisjointRule,
    levels: usize,
    targets: Option<Vec<Rational>>,
    config: &ExtractionConfig,
) -> Result<ExtractionTrace> {
    if ms.is_empty() {
        return Err(Error::EmptyInput("set functions"));
    }
    seq.validate()?;
    let targets = match targets {
        Some(t) => t,
        None => derived_targets(ms, levels)?,
    };
    check_targets(&targets)?;
    if targets.len() < levels {
        return Err(Error::InvalidSequence(format!("{} targets for {levels} levels", targets.len())));
    }
    let mut block = Block::ALL;
    let mut prev = 0u64;
    let mut out = Vec::with_capacity(levels);
    for (l, target) in targets.iter().take(levels).enumerate() {
        let mut chosen = None;
        for r in 1..=config.width {
            let Some(sub) = block.sub_block(r) else { break };
            let bounds: Vec<BlockBound> =
                ms.iter().map(|m| certify_union(m, seq, sub.iter(), config.prefix_cap)).collect();
            if bounds.iter().all(|b| b.attained <= *target) {
                chosen = Some((r, sub, bounds));
                break;
            }
        }
        let (r, sub, bounds) = chosen.ok_or(Error::NoBlockFound { level: l + 1, width: config.width as usize })?;
        let index = sub.first_after(prev).ok_or(Error::Overflow("extracted index"))?;
        out.push(ExtractionLevel {
            level: l + 1,
            sub_block: r,
            block: sub,
            block_prefix: sub.prefix(8),
            target: target.clone(),
            bounds,
            index,
        });
        block = sub;
        prev = index;
    }
    Ok(ExtractionTrace {
        functions: ms.to_vec(),
        sequence: seq.clone(),
        targets: targets[..levels].to_vec(),
        config: config.clone(),
        output_indices: out.iter().map(|l| l.index).collect(),
        levels: out,
    })
}

fn horizon(trace: &ExtractionTrace, samples: usize) -> Horizon {
    Horizon { rows: 1, cols: trace.config.width as usize, length: trace.levels.len(), phi_samples: samples }
}

/// Indices `n_h` for `h ∈ chosen`, then the last block beyond `n_L` when `with_tail`.
fn chain_indices<'a>(
    trace: &'a ExtractionTrace,
    chosen: &'a [usize],
    with_tail: bool,
) -> impl Iterator<Item = u64> + 'a {
    let last = trace.output_indices.last().copied().unwrap_or(0);
    let tail = trace.last_block().iter().filter(move |&h| h > last);
    chosen.iter().map(|&h| trace.output_indices[h - 1]).chain(tail.take_while(move |_| with_tail))
}

/// Re-verifies a trace against `ms`: block nesting, increasing indices with
/// `n_l` in the level-`l` block, recertified level bounds, and
/// `v(m)(F_s) <= b_s` along decreasing chains `F_s` in the generated algebra
/// (tail unions plus `samples` random unions of suffixes), for `s <= depth`.
pub fn verify_restricted_continuity(
    trace: &ExtractionTrace,
    ms: &[CountableSetFunction],
    depth: usize,
    samples: usize,
    seed: u64,
) -> Result<Certificate> {
    if ms.is_empty() {
        return Err(Error::EmptyInput("set functions"));
    }
    let hz = horizon(trace, samples);
    let fail = |label: String, indices: Vec<usize>, values: Vec<Rational>| {
        Ok(Certificate::violated(
            hz,
            Witness::new(label).indices(indices).values(values.into_iter().map(LatticeValue::Scalar).collect()),
        )
        .with_seed(Some(seed)))
    };
    if trace.output_indices.len() != trace.levels.len() || trace.targets.len() < trace.levels.len() {
        return fail("trace lengths disagree".into(), vec![], vec![]);
    }
    let mut parent = Block::ALL;
    for (i, lvl) in trace.levels.iter().enumerate() {
        let l = i + 1;
        let n = trace.output_indices[i];
        if !lvl.block.is_sub_block_of(parent) {
            return fail(format!("block of level {l} is nested in the previous one"), vec![l], vec![]);
        }
        if !lvl.block.contains(n) || lvl.index != n {
            return fail(format!("n_{l} lies in the level-{l} block"), vec![l], vec![]);
        }
        if i > 0 && n <= trace.output_indices[i - 1] {
            return fail(format!("n_{} < n_{l}", l - 1), vec![l - 1, l], vec![]);
        }
        for (j, m) in ms.iter().enumerate() {
            let bound = certify_union(m, &trace.sequence, lvl.block.iter(), trace.config.prefix_cap);
            if bound.attained > trace.targets[i] {
                return fail(
                    format!("v(m_{})(union over the level-{l} block) <= b_{l}", j + 1),
                    vec![l],
                    vec![bound.attained, trace.targets[i].clone()],
                );
            }
        }
        parent = lvl.block;
    }

    let big_l = trace.levels.len();
    let depth = depth.min(big_l);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chains: Vec<(Vec<usize>, bool)> = vec![((1..=big_l).collect(), true)];
    for _ in 0..samples {
        let chosen: Vec<usize> = (1..=big_l).filter(|_| rng.random_bool(0.5)).collect();
        chains.push((chosen, rng.random_bool(0.5)));
    }
    for (c, (chosen, with_tail)) in chains.iter().enumerate() {
        for s in 1..=depth {
            let suffix: Vec<usize> = chosen.iter().copied().filter(|&h| h >= s).collect();
            for (j, m) in ms.iter().enumerate() {
                let bound = certify_union(
                    m,
                    &trace.sequence,
                    chain_indices(trace, &suffix, *with_tail),
                    trace.config.prefix_cap,
                );
                if bound.attained > trace.targets[s - 1] {
                    return fail(
                        format!("v(m_{})(F_s) <= b_s along chain {}", j + 1, c + 1),
                        vec![s],
                        vec![bound.attained, trace.targets[s - 1].clone()],
                    );
                }
            }
        }
    }
    let mut cert = Certificate::holds(hz).with_seed(Some(seed));
    cert.n0 = Some(1);
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::value::{int, rat};
    use crate::lattice::Verdict;
    use crate::setfun::WeightRule;

    fn alt2() -> CountableSetFunction {
        CountableSetFunction::new(WeightRule::AlternatingPower { p: 2 }).unwrap()
    }

    #[test]
    fn sub_blocks_partition() {
        let b = Block { start: 2, step: 4 };
        let mut seen: Vec<u64> =
            (1..=6).flat_map(|r| b.sub_block(r).unwrap().prefix(40)).filter(|&h| h < 200).collect();
        seen.sort_unstable();
        seen.dedup();
        let expect: Vec<u64> = b.iter().take_while(|&h| h < 200).collect();
        // every member below 200 lands in one of the first six sub-blocks
        assert_eq!(seen, expect);
        let total: usize = (1..=6).map(|r| b.sub_block(r).unwrap().iter().take_while(|&h| h < 200).count()).sum();
        assert_eq!(total, expect.len());
        assert!(b.sub_block(70).is_none());
        assert_eq!(b.first_after(5), Some(6));
        assert_eq!(b.first_after(1), Some(2));
    }

    #[test]
    fn alternating_series_extraction() {
        let m = alt2();
        let trace =
            extract_continuous_subsequence(&m, &DisjointRule::Singletons, 4, None, &ExtractionConfig::default())
                .unwrap();
        for (l, lvl) in trace.levels.iter().enumerate() {
            assert!(lvl.bounds[0].attained <= rat(1, l as i64 + 1));
            assert_eq!(lvl.bounds[0].attained, &lvl.bounds[0].prefix + &lvl.bounds[0].tail);
        }
        assert!(trace.output_indices.windows(2).all(|w| w[0] < w[1]));
        let cert = verify_restricted_continuity(&trace, &[m], 4, 16, 3).unwrap();
        assert!(cert.is_holds(), "{cert:?}");
    }

    #[test]
    fn zero_function_takes_first_blocks() {
        let zero = CountableSetFunction::new(WeightRule::Zero).unwrap();
        let trace =
            extract_continuous_subsequence(&zero, &DisjointRule::Singletons, 5, None, &ExtractionConfig::default())
                .unwrap();
        assert!(trace.levels.iter().all(|l| l.sub_block == 1 && l.bounds[0].attained.is_zero()));
        assert_eq!(trace.output_indices, vec![1, 5, 9, 17, 33]);
        assert!(verify_restricted_continuity(&trace, &[zero], 5, 8, 0).unwrap().is_holds());
    }

    #[test]
    fn swapped_trace_is_caught() {
        let m = alt2();
        let mut trace =
            extract_continuous_subsequence(&m, &DisjointRule::Singletons, 6, None, &ExtractionConfig::default())
                .unwrap();
        trace.output_indices.swap(1, 4);
        let cert = verify_restricted_continuity(&trace, &[m], 6, 8, 0).unwrap();
        assert_eq!(cert.verdict, Verdict::Violated);
    }

    #[test]
    fn tight_targets_fail_to_find_blocks() {
        let m = alt2();
        let cfg = ExtractionConfig { width: 3, prefix_cap: 64 };
        let err = extract_continuous_subsequence(&m, &DisjointRule::Singletons, 2, Some(vec![rat(1, 1000); 2]), &cfg);
        assert!(matches!(err, Err(Error::NoBlockFound { level: 1, width: 3 })));
    }

    #[test]
    fn family_extraction_covers_scaled_copies() {
        let m = alt2();
        let ms: Vec<_> = (1..=4).map(|j| m.scaled(&(int(2) - rat(1, j)))).collect();
        let trace = extract_for_family(
            &ms,
            &DisjointRule::Singletons,
            4,
            &int(4),
            Some((1..=4).map(|l| rat(1, l)).collect()),
            &ExtractionConfig::default(),
        )
        .unwrap();
        assert!(trace.levels.iter().all(|l| l.bounds.len() == 4));
        assert!(verify_restricted_continuity(&trace, &ms, 4, 8, 1).unwrap().is_holds());

        let single = extract_for_family(
            std::slice::from_ref(&m),
            &DisjointRule::Singletons,
            4,
            &int(2),
            None,
            &ExtractionConfig::default(),
        )
        .unwrap();
        let alone =
            extract_continuous_subsequence(&m, &DisjointRule::Singletons, 4, None, &ExtractionConfig::default())
                .unwrap();
        assert_eq!(single, alone);
        assert!(
            extract_for_family(&ms, &DisjointRule::Singletons, 2, &int(1), None, &ExtractionConfig::default()).is_err()
        );
    }

    #[test]
    fn interval_sequences() {
        let m = CountableSetFunction::new(WeightRule::Geometric { q: rat(-1, 2) }).unwrap();
        let seq: DisjointRule = "intervals 3".parse().unwrap();
        assert_eq!(seq.set(2).unwrap(), vec![4, 5, 6]);
        let trace = extract_continuous_subsequence(&m, &seq, 3, None, &ExtractionConfig::default()).unwrap();
        assert!(verify_restricted_continuity(&trace, &[m], 3, 8, 2).unwrap().is_holds());
        assert!("intervals 0".parse::<DisjointRule>().is_err());
        assert_eq!("multiples 2".parse::<DisjointRule>().unwrap().to_string(), "multiples 2");
    }

    #[test]
    fn trace_serializes() {
        let trace =
            extract_continuous_subsequence(&alt2(), &DisjointRule::Singletons, 2, None, &ExtractionConfig::default())
                .unwrap();
        let json = serde_json::to_string(&trace).unwrap();
        assert!(json.contains("\"1/2\""));
        let back: ExtractionTrace = serde_json::from_str(&json).unwrap();
        assert_eq!(back, trace);
    }
}
