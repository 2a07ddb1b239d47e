//! Confusion matrices, per-label precision/recall/F1, micro and macro
//! aggregates, and cross-fold averaging.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::FaceActLabel;

/// Counts indexed `[gold][predicted]` over an ordered label set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    /// Gold count of label `i`.
    pub fn row_sum(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    /// Predicted count of label `i`.
    pub fn col_sum(&self, i: usize) -> u64 {
        self.counts.iter().map(|row| row[i]).sum()
    }
}

pub fn confusion<S: AsRef<str>>(pairs: &[(S, S)], labelset: &[String]) -> Result<ConfusionMatrix> {
    let index: HashMap<&str, usize> = labelset.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let lookup = |label: &str| {
        index
            .get(label)
            .copied()
            .ok_or_else(|| Error::LabelOutsideSet(label.to_string()))
    };
    let mut counts = vec![vec![0u64; labelset.len()]; labelset.len()];
    for (gold, pred) in pairs {
        counts[lookup(gold.as_ref())?][lookup(pred.as_ref())?] += 1;
    }
    Ok(ConfusionMatrix {
        labels: labelset.to_vec(),
        counts,
    })
}

/// Confusion matrix over all nine face-act labels in canonical order.
pub fn face_act_confusion(pairs: &[(FaceActLabel, FaceActLabel)]) -> ConfusionMatrix {
    let pairs: Vec<(&str, &str)> = pairs.iter().map(|(g, p)| (g.as_str(), p.as_str())).collect();
    confusion(&pairs, &FaceActLabel::label_strings()).expect("face-act labels are in the set")
}

/// Each row divided by its sum; rows without support stay zero.
pub fn row_normalize(cm: &ConfusionMatrix) -> Vec<Vec<f64>> {
    cm.counts
        .iter()
        .map(|row| {
            let total: u64 = row.iter().sum();
            if total == 0 {
                vec![0.0; row.len()]
            } else {
                row.iter().map(|&c| c as f64 / total as f64).collect()
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerLabelMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub const MACRO_POLICY: &str = "unweighted mean over labels with gold support in each fold";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    /// Number of fold reports averaged into this one (1 for a single fold).
    pub folds: usize,
    pub macro_policy: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_label: Vec<PerLabelMetrics>,
    pub micro_precision: f64,
    pub micro_recall: f64,
    pub micro_f1: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    /// Macro scores with one label additionally dropped, keyed by that label.
    pub macro_excl: BTreeMap<String, MacroScores>,
    pub n: u64,
    pub meta: ReportMeta,
}

impl MetricsReport {
    pub fn label(&self, label: &str) -> Option<&PerLabelMetrics> {
        self.per_label.iter().find(|m| m.label == label)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

fn macro_over<'a>(metrics: impl Iterator<Item = &'a PerLabelMetrics>) -> MacroScores {
    let chosen: Vec<&PerLabelMetrics> = metrics.filter(|m| m.support > 0).collect();
    let mean = |f: fn(&PerLabelMetrics) -> f64| {
        if chosen.is_empty() {
            0.0
        } else {
            chosen.iter().map(|m| f(m)).sum::<f64>() / chosen.len() as f64
        }
    };
    MacroScores {
        precision: mean(|m| m.precision),
        recall: mean(|m| m.recall),
        f1: mean(|m| m.f1),
    }
}

/// Scores a confusion matrix. Macro averages cover labels with gold
/// support; every label in `excl` also gets a macro entry without it.
pub fn report(cm: &ConfusionMatrix, excl: &BTreeSet<String>) -> MetricsReport {
    let per_label: Vec<PerLabelMetrics> = cm
        .labels
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let tp = cm.counts[i][i];
            let precision = ratio(tp, cm.col_sum(i));
            let recall = ratio(tp, cm.row_sum(i));
            PerLabelMetrics {
                label: label.clone(),
                precision,
                recall,
                f1: f1_score(precision, recall),
                support: cm.row_sum(i),
            }
        })
        .collect();
    let n = cm.total();
    let accuracy = ratio(cm.trace(), n);
    let all = macro_over(per_label.iter());
    let macro_excl = excl
        .iter()
        .map(|dropped| {
            let scores = macro_over(per_label.iter().filter(|m| &m.label != dropped));
            (dropped.clone(), scores)
        })
        .collect();
    MetricsReport {
        per_label,
        micro_precision: accuracy,
        micro_recall: accuracy,
        micro_f1: accuracy,
        macro_precision: all.precision,
        macro_recall: all.recall,
        macro_f1: all.f1,
        macro_excl,
        n,
        meta: ReportMeta {
            folds: 1,
            macro_policy: MACRO_POLICY.to_string(),
        },
    }
}

/// Unweighted mean of every metric across fold reports; supports and `n`
/// are summed.
pub fn average_folds(reports: &[MetricsReport]) -> Result<MetricsReport> {
    let first = reports
        .first()
        .ok_or_else(|| Error::InvalidArgument("no fold reports to average".into()))?;
    let labels: Vec<&str> = first.per_label.iter().map(|m| m.label.as_str()).collect();
    for r in reports {
        let other: Vec<&str> = r.per_label.iter().map(|m| m.label.as_str()).collect();
        if other != labels || r.macro_excl.keys().ne(first.macro_excl.keys()) {
            return Err(Error::InvalidArgument("fold reports have different label sets".into()));
        }
    }
    let k = reports.len() as f64;
    let mean = |f: &dyn Fn(&MetricsReport) -> f64| reports.iter().map(f).sum::<f64>() / k;
    let per_label = labels
        .iter()
        .enumerate()
        .map(|(i, label)| PerLabelMetrics {
            label: label.to_string(),
            precision: mean(&|r| r.per_label[i].precision),
            recall: mean(&|r| r.per_label[i].recall),
            f1: mean(&|r| r.per_label[i].f1),
            support: reports.iter().map(|r| r.per_label[i].support).sum(),
        })
        .collect();
    let macro_excl = first
        .macro_excl
        .keys()
        .map(|key| {
            let scores = MacroScores {
                precision: mean(&|r| r.macro_excl[key].precision),
                recall: mean(&|r| r.macro_excl[key].recall),
                f1: mean(&|r| r.macro_excl[key].f1),
            };
            (key.clone(), scores)
        })
        .collect();
    Ok(MetricsReport {
        per_label,
        micro_precision: mean(&|r| r.micro_precision),
        micro_recall: mean(&|r| r.micro_recall),
        micro_f1: mean(&|r| r.micro_f1),
        macro_precision: mean(&|r| r.macro_precision),
        macro_recall: mean(&|r| r.macro_recall),
        macro_f1: mean(&|r| r.macro_f1),
        macro_excl,
        n: reports.iter().map(|r| r.n).sum(),
        meta: ReportMeta {
            folds: reports.iter().map(|r| r.meta.folds).sum(),
            macro_policy: first.meta.macro_policy.clone(),
        },
    })
}

/// Plain-text rendering of a report for terminals.
pub fn render_report(report: &MetricsReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<12} {:>6} {:>6} {:>6} {:>8}", "", "F1", "Prec.", "Recall", "Support");
    let _ = writeln!(
        out,
        "{:<12} {:>6.3} {:>6.3} {:>6.3} {:>8}",
        "Macro", report.macro_f1, report.macro_precision, report.macro_recall, "-"
    );
    let _ = writeln!(
        out,
        "{:<12} {:>6.3} {:>6.3} {:>6.3} {:>8}",
        "Micro", report.micro_f1, report.micro_precision, report.micro_recall, report.n
    );
    for (label, scores) in &report.macro_excl {
        let name = format!("Macro-{label}");
        let _ = writeln!(
            out,
            "{:<12} {:>6.3} {:>6.3} {:>6.3} {:>8}",
            name, scores.f1, scores.precision, scores.recall, "-"
        );
    }
    for m in &report.per_label {
        let _ = writeln!(
            out,
            "{:<12} {:>6.3} {:>6.3} {:>6.3} {:>8}",
            m.label, m.f1, m.precision, m.recall, m.support
        );
    }
    out
}

/// Plain-text rendering of a matrix; rows are gold labels.
pub fn render_matrix(labels: &[String], rows: &[Vec<f64>], decimals: usize) -> String {
    let width = labels.iter().map(|l| l.len()).max().unwrap_or(0).max(decimals + 2);
    let corner = "gold\\pred";
    let first = width.max(corner.len());
    let mut out = format!("{corner:<first$}");
    for label in labels {
        let _ = write!(out, " {label:>width$}");
    }
    out.push('\n');
    for (label, row) in labels.iter().zip(rows) {
        let _ = write!(out, "{label:<first$}");
        for value in row {
            let _ = write!(out, " {value:>width$.decimals$}");
        }
        out.push('\n');
    }
    out
}
