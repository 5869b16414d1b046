//! Rendering of command results as aligned tables, JSON records, or CSV.

use std::fmt::Write as _;

use clap::ValueEnum;
use ktri_core::lattice::{approx, parse_rational};
use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Table,
    Records,
    Csv,
}

/// Everything needed to reproduce a run; echoed at the top of every report.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequence: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon_phis: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon_depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon_width: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    pub format: Option<Format>,
}

/// A tabular result plus structured records and closing summary lines.
#[derive(Debug, Default)]
pub struct Report {
    pub header: Vec<String>,
    /// Machine cells (`p/q` rationals).
    pub rows: Vec<Vec<String>>,
    pub records: Vec<Value>,
    pub summary: Vec<(String, Value)>,
}

impl Report {
    pub fn with_header(header: &[&str]) -> Self {
        Report { header: header.iter().map(|s| s.to_string()).collect(), ..Default::default() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn record(&mut self, value: impl Serialize) {
        self.records.push(serde_json::to_value(value).expect("serializable"));
    }

    pub fn summary(&mut self, key: &str, value: impl Serialize) {
        self.summary.push((key.to_string(), serde_json::to_value(value).expect("serializable")));
    }
}

/// Appends a decimal approximation to cells that look like `p/q`; long fractions are replaced by it.
fn human(cell: &str) -> String {
    if !cell.contains('/') {
        return cell.to_string();
    }
    match parse_rational(cell) {
        Ok(r) if !r.is_integer() && cell.len() > 32 => format!("~{:.6}", approx(&r)),
        Ok(r) if !r.is_integer() => format!("{cell} (~{:.6})", approx(&r)),
        _ => cell.to_string(),
    }
}

fn csv_cell(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

pub fn render(config: &RunConfig, report: &Report, format: Format) -> String {
    let config_json = serde_json::to_string(config).expect("serializable");
    let mut out = String::new();
    match format {
        Format::Records => {
            writeln!(out, "{}", serde_json::json!({ "config": serde_json::to_value(config).unwrap() })).unwrap();
            for r in &report.records {
                writeln!(out, "{r}").unwrap();
            }
            let summary: serde_json::Map<String, Value> = report.summary.iter().cloned().collect();
            writeln!(out, "{}", serde_json::json!({ "summary": summary })).unwrap();
        }
        Format::Csv => {
            writeln!(out, "# config: {config_json}").unwrap();
            writeln!(out, "{}", report.header.iter().map(|h| csv_cell(h)).collect::<Vec<_>>().join(",")).unwrap();
            for row in &report.rows {
                writeln!(out, "{}", row.iter().map(|c| csv_cell(c)).collect::<Vec<_>>().join(",")).unwrap();
            }
        }
        Format::Table => {
            writeln!(out, "# config: {config_json}").unwrap();
            let cells: Vec<Vec<String>> = report.rows.iter().map(|r| r.iter().map(|c| human(c)).collect()).collect();
            let widths: Vec<usize> = (0..report.header.len())
                .map(|i| {
                    cells
                        .iter()
                        .filter_map(|r| r.get(i))
                        .map(|c| c.chars().count())
                        .chain([report.header[i].len()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let line = |row: &[String]| {
                row.iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:<w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
            };
            if !report.header.is_empty() {
                writeln!(out, "{}", line(&report.header)).unwrap();
                writeln!(out, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  ")).unwrap();
            }
            for row in &cells {
                writeln!(out, "{}", line(row)).unwrap();
            }
            for (k, v) in &report.summary {
                let shown = match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                writeln!(out, "{k}: {shown}").unwrap();
            }
        }
    }
    out
}
