//! Command implementations. Each returns rendered text and an exit code:
//! 0 pass, 1 violation, 2 input error, 3 hypothesis not met.

use std::fs;
use std::path::Path;

use ktri_core::corpus::{load_payload, verify_corpus, write_corpus, Payload};
use ktri_core::drewnowski::{
    extract_continuous_subsequence, verify_restricted_continuity, CountableSetFunction, DisjointRule, ExtractionConfig,
};
use ktri_core::lattice::{format_rational, parse_rational};
use ktri_core::limits::{
    schur_gap, theorem_harness, HarnessConfig, HarnessInputs, HarnessVerdict, SetFunctionFamily, Theorem,
};
use ktri_core::setfun::{check_k_triangular, is_monotone, minimal_k, semivariation_table, SetFunction, WeightRule};
use ktri_core::{Error, Result};
use serde_json::json;

use crate::output::{render, Report, RunConfig};
use crate::Command;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_HYPOTHESIS: u8 = 3;

/// Largest ground set printed as a full semivariation table.
pub const MAX_TABLE_ATOMS: usize = 16;

pub struct Outcome {
    pub text: String,
    pub code: u8,
}

pub fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Check { fixture, k, common } => {
            let config = RunConfig {
                command: "check".into(),
                fixture: Some(fixture.display().to_string()),
                k: Some(k.clone()),
                seed: Some(common.seed),
                format: Some(common.format),
                ..Default::default()
            };
            let (report, code) = check(&fixture, &k)?;
            Ok(Outcome { text: render(&config, &report, common.format), code })
        }
        Command::Semivar { fixture, common } => {
            let config = RunConfig {
                command: "semivar".into(),
                fixture: Some(fixture.display().to_string()),
                format: Some(common.format),
                ..Default::default()
            };
            let report = semivar(&fixture)?;
            Ok(Outcome { text: render(&config, &report, common.format), code: EXIT_OK })
        }
        Command::Harness { fixture, theorem, k, inputs, horizon_phis, common } => {
            let config = RunConfig {
                command: "harness".into(),
                fixture: Some(fixture.display().to_string()),
                theorem: Some(theorem.clone()),
                k: Some(k.clone()),
                seed: Some(common.seed),
                horizon_phis: Some(horizon_phis),
                format: Some(common.format),
                ..Default::default()
            };
            let harness = HarnessConfig { k: parse_rational(&k)?, seed: common.seed, random_phis: horizon_phis };
            let (report, code) = harness_cmd(&fixture, &theorem.parse()?, inputs.as_deref(), &harness)?;
            Ok(Outcome { text: render(&config, &report, common.format), code })
        }
        Command::Drewnowski {
            weights,
            sequence,
            levels,
            targets,
            horizon_depth,
            horizon_width,
            horizon_samples,
            common,
        } => {
            let config = RunConfig {
                command: "drewnowski".into(),
                weights: Some(weights.clone()),
                sequence: Some(sequence.clone()),
                levels: Some(levels),
                targets: targets.clone(),
                seed: Some(common.seed),
                horizon_depth: Some(horizon_depth.unwrap_or(levels)),
                horizon_width: Some(horizon_width),
                format: Some(common.format),
                ..Default::default()
            };
            let (report, code) = drewnowski(
                &weights,
                &sequence,
                levels,
                targets.as_deref(),
                horizon_depth.unwrap_or(levels),
                horizon_width,
                horizon_samples,
                common.seed,
            )?;
            Ok(Outcome { text: render(&config, &report, common.format), code })
        }
        Command::SchurGap { fixture, n, common } => {
            let config = RunConfig {
                command: "schur-gap".into(),
                fixture: Some(fixture.display().to_string()),
                n,
                format: Some(common.format),
                ..Default::default()
            };
            let report = schur(&fixture, n)?;
            Ok(Outcome { text: render(&config, &report, common.format), code: EXIT_OK })
        }
        Command::CorpusVerify { dir, regenerate, common } => {
            let config = RunConfig {
                command: "corpus-verify".into(),
                dir: Some(dir.display().to_string()),
                format: Some(common.format),
                ..Default::default()
            };
            if regenerate {
                write_corpus(&dir)?;
            }
            let (report, code) = corpus(&dir)?;
            Ok(Outcome { text: render(&config, &report, common.format), code })
        }
    }
}

fn read_payload(path: &Path) -> Result<Payload> {
    load_payload(&fs::read_to_string(path)?)
}

fn functions(path: &Path) -> Result<Vec<(String, SetFunction)>> {
    Ok(match read_payload(path)? {
        Payload::Function { function } | Payload::Factor { function, .. } => vec![("m".into(), function)],
        Payload::Family { family } => {
            let mut out: Vec<_> =
                family.members().iter().enumerate().map(|(j, m)| (format!("m_{}", j + 1), m.clone())).collect();
            if let Some(m0) = family.limit() {
                out.push(("m_0".into(), m0.clone()));
            }
            out
        }
        Payload::Trace { .. } => return Err(Error::Fixture("extraction traces carry no finite set function".into())),
    })
}

fn family(path: &Path) -> Result<SetFunctionFamily> {
    match read_payload(path)? {
        Payload::Family { family } => Ok(family),
        _ => Err(Error::Fixture(format!("{} does not hold a family", path.display()))),
    }
}

fn check(path: &Path, k: &str) -> Result<(Report, u8)> {
    let k = parse_rational(k)?;
    let mut report = Report::with_header(&[
        "function",
        "pairs",
        "subadditivity_violations",
        "lower_violations",
        "minimal_k",
        "monotone",
    ]);
    let mut violated = false;
    for (name, m) in functions(path)? {
        let tri = check_k_triangular(&m, &k)?;
        let mono = is_monotone(&m)?;
        let min_k = if m.carrier() == ktri_core::Carrier::Scalar { minimal_k(&m)? } else { None };
        violated |= !tri.is_k_triangular();
        let first = tri.subadditivity_violations.first().or(tri.lower_violations.first());
        report.row(vec![
            name.clone(),
            tri.pairs_checked.to_string(),
            tri.subadditivity_count.to_string(),
            tri.lower_count.to_string(),
            min_k.as_ref().map_or("-".into(), format_rational),
            mono.is_holds().to_string(),
        ]);
        report.record(json!({
            "function": name,
            "k": format_rational(&k),
            "k_triangular": tri.is_k_triangular(),
            "pairs_checked": tri.pairs_checked,
            "subadditivity_violations": tri.subadditivity_count,
            "lower_violations": tri.lower_count,
            "violation_witness": first.map(|(a, b)| json!({
                "A": a.to_string(),
                "B": b.to_string(),
                "m(A)": m.eval(*a).to_string(),
                "m(B)": m.eval(*b).to_string(),
                "m(A∪B)": m.eval(a.union(*b)).to_string(),
            })),
            "minimal_k": min_k.as_ref().map(format_rational),
            "monotone": mono.is_holds(),
            "monotonicity_witness": mono.witness,
        }));
        if let Some((a, b)) = first {
            report.summary(&format!("{name} violation"), format!("A={a} B={b}"));
        }
        if let Some(w) = &mono.witness {
            report.summary(
                &format!("{name} non-monotone"),
                format!("m({}) = {} > m({}) = {}", w.sets[0], w.values[0], w.sets[1], w.values[1]),
            );
        }
    }
    report.summary("verdict", if violated { "VIOLATED" } else { "HOLDS" });
    Ok((report, if violated { EXIT_VIOLATION } else { EXIT_OK }))
}

fn semivar(path: &Path) -> Result<Report> {
    let mut report = Report::with_header(&["function", "set", "m", "v(m)", "argmax"]);
    for (name, m) in functions(path)? {
        let n = m.algebra().atoms();
        if n > MAX_TABLE_ATOMS {
            return Err(Error::TooLarge { what: "semivariation table atoms", n, max: MAX_TABLE_ATOMS });
        }
        let table = semivariation_table(&m)?;
        for set in m.algebra().members() {
            let idx = set.bits() as usize;
            let arg = table.argmax.as_ref().map(|a| a[idx]);
            let value = m.eval(set);
            report.row(vec![
                name.clone(),
                set.to_string(),
                value.to_string(),
                table.values[idx].to_string(),
                arg.map_or("-".into(), |a| a.to_string()),
            ]);
            report.record(json!({
                "function": name,
                "set": set.to_string(),
                "m": value.to_string(),
                "v": table.values[idx].to_string(),
                "argmax": arg.map(|a| a.to_string()),
            }));
        }
        let ground = m.algebra().ground();
        report.summary(&format!("{name} v(m)(ground)"), table.values[ground.bits() as usize].to_string());
    }
    Ok(report)
}

fn harness_cmd(path: &Path, theorem: &Theorem, inputs: Option<&Path>, config: &HarnessConfig) -> Result<(Report, u8)> {
    let fam = family(path)?;
    let inputs = match inputs {
        Some(p) => serde_json::from_str::<HarnessInputs>(&fs::read_to_string(p)?)?,
        None => HarnessInputs::defaults(fam.algebra().atoms())?,
    };
    let result = theorem_harness(&fam, *theorem, &inputs, config)?;
    let mut report = Report::with_header(&["kind", "check", "verdict", "witness"]);
    for (kind, records) in [("hypothesis", &result.hypotheses), ("conclusion", &result.conclusions)] {
        for r in records {
            let witness = r.certificate.witness.as_ref().map_or("-".into(), |w| {
                let sets: Vec<String> = w.sets.iter().map(|s| s.to_string()).collect();
                let values: Vec<String> = w.values.iter().map(|v| v.to_string()).collect();
                format!("{} sets=[{}] values=[{}]", w.label, sets.join(" "), values.join(" "))
            });
            report.row(vec![kind.into(), r.name.clone(), r.certificate.verdict.to_string(), witness]);
            report.record(json!({ "kind": kind, "check": r.name, "certificate": r.certificate }));
        }
    }
    if let Some(rows) = &result.schur_gap {
        for row in rows {
            report.record(json!({ "kind": "schur-gap", "j": row.j, "gap": row.gap, "witness": row.witness.map(|w| w.to_string()) }));
        }
        let shown: Vec<String> = rows.iter().take(5).map(|r| format!("{}:{}", r.j, r.gap)).collect();
        report.summary("schur gap", shown.join(" "));
    }
    report.summary("theorem", result.theorem.to_string());
    if !result.failed.is_empty() {
        report.summary("failed", result.failed.join("; "));
    }
    report.summary("verdict", result.verdict.to_string());
    let code = match result.verdict {
        HarnessVerdict::Consistent => EXIT_OK,
        HarnessVerdict::Violation => EXIT_VIOLATION,
        HarnessVerdict::HypothesisNotMet => EXIT_HYPOTHESIS,
    };
    Ok((report, code))
}

#[allow(clippy::too_many_arguments)]
fn drewnowski(
    weights: &str,
    sequence: &str,
    levels: usize,
    targets: Option<&[String]>,
    depth: usize,
    width: u32,
    samples: usize,
    seed: u64,
) -> Result<(Report, u8)> {
    let rule: WeightRule = weights.parse()?;
    let m = CountableSetFunction::new(rule)?;
    let seq: DisjointRule = sequence.parse()?;
    let targets =
        targets.map(|t| t.iter().map(|s| parse_rational(s.trim())).collect::<Result<Vec<_>>>()).transpose()?;
    let cfg = ExtractionConfig { width, ..ExtractionConfig::default() };
    let trace = extract_continuous_subsequence(&m, &seq, levels, targets, &cfg)?;
    let cert = verify_restricted_continuity(&trace, std::slice::from_ref(&m), depth, samples, seed)?;
    let mut report = Report::with_header(&[
        "level",
        "sub_block",
        "start",
        "step",
        "n_l",
        "prefix",
        "tail_from",
        "tail",
        "attained",
        "target",
    ]);
    for lvl in &trace.levels {
        let b = &lvl.bounds[0];
        report.row(vec![
            lvl.level.to_string(),
            lvl.sub_block.to_string(),
            lvl.block.start.to_string(),
            lvl.block.step.to_string(),
            lvl.index.to_string(),
            format_rational(&b.prefix),
            b.tail_from.to_string(),
            format_rational(&b.tail),
            format_rational(&b.attained),
            format_rational(&lvl.target),
        ]);
        report.record(lvl);
    }
    report.summary("indices", trace.output_indices.iter().map(u64::to_string).collect::<Vec<_>>().join(" "));
    report.summary("verdict", cert.verdict.to_string());
    if let Some(w) = &cert.witness {
        report.summary("witness", w.label.clone());
    }
    Ok((report, if cert.is_holds() { EXIT_OK } else { EXIT_VIOLATION }))
}

fn schur(path: &Path, n: Option<usize>) -> Result<Report> {
    let fam = family(path)?;
    let rows = schur_gap(&fam, n.unwrap_or(fam.algebra().atoms()))?;
    let mut report = Report::with_header(&["j", "gap", "witness"]);
    for r in &rows {
        let w = r.witness.map_or("-".into(), |w| w.to_string());
        report.row(vec![r.j.to_string(), r.gap.to_string(), w.clone()]);
        report.record(json!({ "j": r.j, "gap": r.gap, "witness": w }));
    }
    Ok(report)
}

fn corpus(dir: &Path) -> Result<(Report, u8)> {
    let checks = verify_corpus(dir)?;
    let mut report = Report::with_header(&["file", "checksum", "regenerates", "expectations", "failed"]);
    for c in &checks {
        let failed: Vec<String> = c
            .expectations
            .iter()
            .filter(|e| !e.ok)
            .map(|e| format!("{:?}: expected {} got {}", e.expectation.quantity, e.expectation.expected, e.actual))
            .collect();
        report.row(vec![
            c.file.clone(),
            c.checksum_ok.to_string(),
            c.regenerates.to_string(),
            c.expectations.len().to_string(),
            if failed.is_empty() { "-".into() } else { failed.join("; ") },
        ]);
        report.record(c);
    }
    let ok = checks.iter().all(|c| c.ok());
    report.summary("fixtures", checks.len());
    report.summary("verdict", if ok { "PASS" } else { "FAIL" });
    Ok((report, if ok { EXIT_OK } else { EXIT_VIOLATION }))
}
