//! Result serialization: CSV records, human-readable summaries, JSON dumps.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bp::Marginals;
use crate::error::{Error, Result};
use crate::experiment::{ExperimentResult, GridCell, RankSummary};
use crate::sim::GroundTruth;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Table,
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(OutputFormat::Table),
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidParameter(format!(
                "unknown format {other:?} (expected table, csv or json)"
            ))),
        }
    }
}

pub const RECORDS_CSV_HEADER: &str = "rep,worst_rank_a,worst_rank_b,converged,iterations";

/// Per-replication records as CSV, one line per record after the header.
pub fn records_to_csv(result: &ExperimentResult) -> String {
    let mut out = String::new();
    out.push_str(RECORDS_CSV_HEADER);
    out.push('\n');
    for r in &result.records {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.replication, r.worst_rank_a, r.worst_rank_b, r.converged, r.iterations
        )
        .expect("write to String cannot fail");
    }
    out
}

fn quantile_str(q: Option<usize>) -> String {
    q.map_or_else(|| "-".to_string(), |v| v.to_string())
}

/// A compact text block for one experiment summary.
pub fn summary_text(s: &RankSummary) -> String {
    let mut out = String::new();
    writeln!(out, "replications      {}", s.replications).unwrap();
    writeln!(out, "failed            {}", s.failed).unwrap();
    writeln!(
        out,
        "converged         {} ({:.3})",
        s.converged, s.convergence_rate
    )
    .unwrap();
    writeln!(
        out,
        "worst rank A      95%: {}  99%: {}  (over {} replications)",
        quantile_str(s.type_a.q95),
        quantile_str(s.type_a.q99),
        s.type_a.counted
    )
    .unwrap();
    writeln!(
        out,
        "worst rank B      95%: {}  99%: {}  (over {} replications)",
        quantile_str(s.type_b.q95),
        quantile_str(s.type_b.q99),
        s.type_b.counted
    )
    .unwrap();
    out
}

/// Formats a design/count sweep as one block per design with a column per
/// defective count, A and B quantiles on separate lines.
pub fn grid_table(q: u32, cells: &[GridCell]) -> String {
    let mut ks: Vec<u32> = cells.iter().map(|c| c.k).collect();
    ks.sort_unstable();
    ks.dedup();
    let mut counts: Vec<usize> = cells.iter().map(|c| c.count).collect();
    counts.sort_unstable();
    counts.dedup();

    let cell = |k: u32, count: usize| cells.iter().find(|c| c.k == k && c.count == count);
    let mut out = String::new();
    writeln!(out, "worst rank (99%/95%) by design and defectives per type").unwrap();
    for &k in &ks {
        let q2 = (q as usize).pow(2);
        writeln!(
            out,
            "design ({k}) m_A=m_B={}, m_AB={}",
            k as usize * q2,
            (q as usize - k as usize) * q2
        )
        .unwrap();
        let mut header = format!("  {:<12}", "defectives");
        for &c in &counts {
            write!(header, "{c:>12}").unwrap();
        }
        writeln!(out, "{header}").unwrap();
        for (label, pick) in [
            ("A", Box::new(|s: &RankSummary| (s.type_a.q99, s.type_a.q95))
                as Box<dyn Fn(&RankSummary) -> (Option<usize>, Option<usize>)>),
            ("B", Box::new(|s: &RankSummary| (s.type_b.q99, s.type_b.q95))),
        ] {
            let mut line = format!("  {label:<12}");
            for &c in &counts {
                let text = match cell(k, c) {
                    Some(gc) => {
                        let (q99, q95) = pick(&gc.summary);
                        format!("{}/{}", quantile_str(q99), quantile_str(q95))
                    }
                    None => "-".to_string(),
                };
                write!(line, "{text:>12}").unwrap();
            }
            writeln!(out, "{line}").unwrap();
        }
        let mut conv = format!("  {:<12}", "convergence");
        for &c in &counts {
            let text = match cell(k, c) {
                Some(gc) => format!("{:.3}", gc.summary.convergence_rate),
                None => "-".to_string(),
            };
            write!(conv, "{text:>12}").unwrap();
        }
        writeln!(out, "{conv}").unwrap();
    }
    out
}

/// Writes an experiment result under `dir` according to `format` and returns
/// the files written: `summary.txt` for tables, plus `records.csv` for CSV,
/// or a single self-contained `results.json`.
pub fn emit_results(
    result: &ExperimentResult,
    format: OutputFormat,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    match format {
        OutputFormat::Table => {
            let path = dir.join("summary.txt");
            fs::write(&path, render_summary_with_failures(result))?;
            written.push(path);
        }
        OutputFormat::Csv => {
            let records = dir.join("records.csv");
            fs::write(&records, records_to_csv(result))?;
            written.push(records);
            let summary = dir.join("summary.txt");
            fs::write(&summary, render_summary_with_failures(result))?;
            written.push(summary);
        }
        OutputFormat::Json => {
            let path = dir.join("results.json");
            let json = serde_json::to_string_pretty(result)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            fs::write(&path, json)?;
            written.push(path);
        }
    }
    Ok(written)
}

fn render_summary_with_failures(result: &ExperimentResult) -> String {
    let mut out = summary_text(&result.summary);
    for f in &result.failures {
        writeln!(out, "failure rep {}: {}", f.replication, f.message).unwrap();
    }
    out
}

/// Re-imports a JSON result file written by [`emit_results`].
pub fn read_results_json(path: &Path) -> Result<ExperimentResult> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::parse(0, e.to_string()))
}

/// One decoded replication, dumpable as CSV or JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationDump {
    pub seed: u64,
    pub converged: bool,
    pub iterations: u32,
    pub defectives_a: Vec<usize>,
    pub defectives_b: Vec<usize>,
    pub marginals: Vec<ItemMarginal>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ItemMarginal {
    pub item: usize,
    pub q00: f64,
    pub q01: f64,
    pub q10: f64,
    pub q11: f64,
    pub p_a: f64,
    pub p_b: f64,
}

impl SimulationDump {
    pub fn new(
        seed: u64,
        converged: bool,
        iterations: u32,
        truth: &GroundTruth,
        marginals: &Marginals,
    ) -> Self {
        let items = (0..marginals.n_items())
            .map(|c| {
                let j = marginals.joint(c);
                ItemMarginal {
                    item: c,
                    q00: j[0],
                    q01: j[1],
                    q10: j[2],
                    q11: j[3],
                    p_a: marginals.p_defective_a(c),
                    p_b: marginals.p_defective_b(c),
                }
            })
            .collect();
        Self {
            seed,
            converged,
            iterations,
            defectives_a: truth.defectives_a(),
            defectives_b: truth.defectives_b(),
            marginals: items,
        }
    }

    pub fn to_csv(&self, truth: &GroundTruth) -> String {
        let mut out = String::from("item,q00,q01,q10,q11,p_a,p_b,x_a,x_b\n");
        for m in &self.marginals {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                m.item,
                m.q00,
                m.q01,
                m.q10,
                m.q11,
                m.p_a,
                m.p_b,
                u8::from(truth.x_a[m.item]),
                u8::from(truth.x_b[m.item])
            )
            .expect("write to String cannot fail");
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidParameter(e.to_string()))
    }
}
