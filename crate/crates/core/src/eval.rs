//! Confusion matrices, per-label precision/recall/F1 and macro averages.
//!
//! Every 0/0 ratio is defined as 0 and flags its row. Macro averages run
//! over the labels present in the gold data, so a spurious predicted label
//! is reported (with support 0) without changing the denominator.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    labels: Vec<String>,
    /// Rows are gold labels, columns predicted labels.
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn count(&self, gold: &str, pred: &str) -> u64 {
        let idx = |l: &str| self.labels.binary_search_by(|x| x.as_str().cmp(l)).ok();
        match (idx(gold), idx(pred)) {
            (Some(g), Some(p)) => self.counts[g][p],
            _ => 0,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.counts.iter().enumerate().all(|(g, row)| row.iter().enumerate().all(|(p, &c)| g == p || c == 0))
    }
}

/// Tallies `(gold_i, pred_i)` pairs over the sorted union of both label sets.
pub fn confusion<G: AsRef<str>, P: AsRef<str>>(gold: &[G], pred: &[P]) -> Result<ConfusionMatrix> {
    if gold.len() != pred.len() {
        return Err(Error::Validation(format!("{} gold labels but {} predictions", gold.len(), pred.len())));
    }
    let labels: Vec<String> = gold
        .iter()
        .map(AsRef::as_ref)
        .chain(pred.iter().map(AsRef::as_ref))
        .collect::<BTreeSet<&str>>()
        .into_iter()
        .map(str::to_string)
        .collect();
    let idx = |l: &str| labels.binary_search_by(|x| x.as_str().cmp(l)).expect("label in union");
    let mut counts = vec![vec![0u64; labels.len()]; labels.len()];
    for (g, p) in gold.iter().zip(pred) {
        counts[idx(g.as_ref())][idx(p.as_ref())] += 1;
    }
    Ok(ConfusionMatrix { labels, counts })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelScore {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold occurrences of the label.
    pub support: u64,
    /// Set when any of the three ratios was 0/0.
    pub zero_division: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_label: Vec<LabelScore>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

fn ratio(num: f64, den: f64, flag: &mut bool) -> f64 {
    if den == 0.0 {
        *flag = true;
        0.0
    } else {
        num / den
    }
}

pub fn scores(cm: &ConfusionMatrix) -> EvalReport {
    let n = cm.labels.len();
    let mut per_label = Vec::with_capacity(n);
    for i in 0..n {
        let tp = cm.counts[i][i] as f64;
        let support: u64 = cm.counts[i].iter().sum();
        let predicted: u64 = cm.counts.iter().map(|row| row[i]).sum();
        let mut flag = false;
        let precision = ratio(tp, predicted as f64, &mut flag);
        let recall = ratio(tp, support as f64, &mut flag);
        let f1 = ratio(2.0 * precision * recall, precision + recall, &mut flag);
        per_label.push(LabelScore { label: cm.labels[i].clone(), precision, recall, f1, support, zero_division: flag });
    }
    let gold: Vec<&LabelScore> = per_label.iter().filter(|r| r.support > 0).collect();
    let mean = |f: fn(&LabelScore) -> f64| {
        if gold.is_empty() {
            0.0
        } else {
            gold.iter().map(|r| f(r)).sum::<f64>() / gold.len() as f64
        }
    };
    EvalReport {
        macro_precision: mean(|r| r.precision),
        macro_recall: mean(|r| r.recall),
        macro_f1: mean(|r| r.f1),
        per_label,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Table,
    Tsv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "tsv" => Ok(ReportFormat::Tsv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Config(format!("unknown report format `{other}`"))),
        }
    }
}

const TSV_HEADER: &str = "label\tprecision\trecall\tf1\tsupport";
const MACRO_TAG: &str = "#macro";

pub fn render_report(report: &EvalReport, format: ReportFormat) -> Result<String> {
    let total: u64 = report.per_label.iter().map(|r| r.support).sum();
    let mut out = String::new();
    match format {
        ReportFormat::Table => {
            let width = report.per_label.iter().map(|r| r.label.chars().count()).max().unwrap_or(0).max(5);
            let _ = writeln!(
                out,
                "{:<width$}  {:>9}  {:>6}  {:>4}  {:>7}",
                "label", "precision", "recall", "f1", "support"
            );
            for r in &report.per_label {
                let _ = writeln!(
                    out,
                    "{:<width$}  {:>9.2}  {:>6.2}  {:>4.2}  {:>7}{}",
                    r.label,
                    r.precision,
                    r.recall,
                    r.f1,
                    r.support,
                    if r.zero_division { "  *" } else { "" }
                );
            }
            let _ = writeln!(
                out,
                "{:<width$}  {:>9.2}  {:>6.2}  {:>4.2}  {:>7}",
                "macro", report.macro_precision, report.macro_recall, report.macro_f1, total
            );
            if report.per_label.iter().any(|r| r.zero_division) {
                out.push_str("* 0/0 ratio counted as 0\n");
            }
        }
        ReportFormat::Tsv => {
            out.push_str(TSV_HEADER);
            out.push('\n');
            for r in &report.per_label {
                let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}", r.label, r.precision, r.recall, r.f1, r.support);
            }
            let _ = writeln!(
                out,
                "{MACRO_TAG}\t{}\t{}\t{}\t{}",
                report.macro_precision, report.macro_recall, report.macro_f1, total
            );
        }
        ReportFormat::Json => {
            out = serde_json::to_string_pretty(report)?;
            out.push('\n');
        }
    }
    Ok(out)
}

/// Reads the TSV rendering back. The zero-division flags are not part of
/// the TSV columns and come back unset.
pub fn parse_tsv_report(input: &str) -> Result<EvalReport> {
    let mut lines = input.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == TSV_HEADER => {}
        _ => return Err(Error::Parse { line: 1, message: "missing report header".into() }),
    }
    let num = |s: &str, line: usize| -> Result<f64> {
        s.parse().map_err(|_| Error::Parse { line, message: format!("bad number `{s}`") })
    };
    let mut per_label = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 5 {
            return Err(Error::Parse { line: n, message: format!("expected 5 columns, found {}", cols.len()) });
        }
        let (p, r, f) = (num(cols[1], n)?, num(cols[2], n)?, num(cols[3], n)?);
        if cols[0] == MACRO_TAG {
            return Ok(EvalReport { per_label, macro_precision: p, macro_recall: r, macro_f1: f });
        }
        let support =
            cols[4].parse().map_err(|_| Error::Parse { line: n, message: format!("bad support `{}`", cols[4]) })?;
        per_label.push(LabelScore {
            label: cols[0].to_string(),
            precision: p,
            recall: r,
            f1: f,
            support,
            zero_division: false,
        });
    }
    Err(Error::Parse { line: input.lines().count(), message: "missing #macro footer".into() })
}
