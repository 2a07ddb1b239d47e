//! Misclassification sampling for manual review, error-category tallies,
//! and prediction-shift analysis between two systems.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::label::FaceActLabel;
use crate::scoring::AlignedPrediction;
use crate::seeded::keyed_u64;
use crate::tagset::TagSet;

/// Why a prediction disagreed with the gold label, as judged by a reviewer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorCategory {
    BothHappeningSamePart,
    BothHappeningDiffPart,
    GoldErrorCorrect,
    GoldErrorIncorrect,
    TrueForPrevious,
    PredictedOther,
    NoIdea,
}

impl ErrorCategory {
    pub const ALL: [ErrorCategory; 7] = [
        ErrorCategory::BothHappeningSamePart,
        ErrorCategory::BothHappeningDiffPart,
        ErrorCategory::GoldErrorCorrect,
        ErrorCategory::GoldErrorIncorrect,
        ErrorCategory::TrueForPrevious,
        ErrorCategory::PredictedOther,
        ErrorCategory::NoIdea,
    ];

    pub fn display_name(self) -> &'static str {
        match self {
            ErrorCategory::BothHappeningSamePart => "Both Happening (Same Part)",
            ErrorCategory::BothHappeningDiffPart => "Both Happening (Diff. Part)",
            ErrorCategory::GoldErrorCorrect => "Gold Error (Correct)",
            ErrorCategory::GoldErrorIncorrect => "Gold Error (Incorrect)",
            ErrorCategory::TrueForPrevious => "True for Previous",
            ErrorCategory::PredictedOther => "Predicted Other",
            ErrorCategory::NoIdea => "No Idea",
        }
    }

    /// The reviewer judged the predicted label to be right.
    pub fn prediction_correct(self) -> bool {
        matches!(
            self,
            ErrorCategory::BothHappeningSamePart | ErrorCategory::BothHappeningDiffPart | ErrorCategory::GoldErrorCorrect
        )
    }

    pub fn gold_error(self) -> bool {
        matches!(self, ErrorCategory::GoldErrorCorrect | ErrorCategory::GoldErrorIncorrect)
    }
}

fn squash(s: &str) -> String {
    s.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect()
}

impl FromStr for ErrorCategory {
    type Err = Error;

    /// Case-insensitive; punctuation and spacing are ignored, so both
    /// `"Gold Error (Correct)"` and `"GoldErrorCorrect"` parse.
    fn from_str(s: &str) -> Result<Self> {
        let key = squash(s);
        ErrorCategory::ALL
            .iter()
            .copied()
            .find(|c| squash(c.display_name()) == key || squash(&format!("{c:?}")) == key)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown error category {s:?}")))
    }
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorSample {
    pub example_id: String,
    pub conversation_id: String,
    pub turn: usize,
    pub fold: Option<usize>,
    /// Preceding turns, one `"<ROLE>: <text>"` line each.
    pub context: String,
    pub text: String,
    pub gold: FaceActLabel,
    pub predicted: FaceActLabel,
    pub category: Option<ErrorCategory>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub per_fold: usize,
    pub cap: usize,
    pub seed: u64,
    pub context_size: usize,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan {
            per_fold: 5,
            cap: 25,
            seed: 0,
            context_size: crate::example::DEFAULT_CONTEXT_SIZE,
        }
    }
}

/// Draws, for every gold label, up to `per_fold` misclassified items from
/// each fold (all of them when a fold has fewer), at most `cap` per label.
/// Output is ordered by label, then fold, then draw.
pub fn sample_errors(corpus: &Corpus, items: &[AlignedPrediction], plan: &SamplingPlan) -> Result<Vec<ErrorSample>> {
    let conversations: HashMap<(&str, Option<usize>), usize> = corpus
        .conversations
        .iter()
        .enumerate()
        .map(|(i, c)| ((c.id.as_str(), c.fold), i))
        .collect();

    let mut buckets: BTreeMap<(FaceActLabel, Option<usize>), Vec<&AlignedPrediction>> = BTreeMap::new();
    for item in items.iter().filter(|i| i.gold != i.predicted) {
        buckets.entry((item.gold, item.fold)).or_default().push(item);
    }

    let mut taken_per_label: BTreeMap<FaceActLabel, usize> = BTreeMap::new();
    let mut samples = Vec::new();
    for ((label, _fold), mut bucket) in buckets {
        bucket.sort_by_cached_key(|item| (keyed_u64(plan.seed, &[label.as_str(), &item.example_id]), item.example_id.clone()));
        let taken = taken_per_label.entry(label).or_insert(0);
        let room = plan.cap.saturating_sub(*taken).min(plan.per_fold);
        for item in bucket.into_iter().take(room) {
            let conv_index = conversations
                .get(&(item.conversation_id.as_str(), item.fold))
                .ok_or_else(|| Error::InvalidArgument(format!("{} is not in the corpus", item.example_id)))?;
            let conv = &corpus.conversations[*conv_index];
            let start = item.turn.saturating_sub(plan.context_size);
            let context = conv.utterances[start..item.turn]
                .iter()
                .map(|u| format!("{}: {}", u.speaker, u.text))
                .collect::<Vec<_>>()
                .join("\n");
            samples.push(ErrorSample {
                example_id: item.example_id.clone(),
                conversation_id: item.conversation_id.clone(),
                turn: item.turn,
                fold: item.fold,
                context,
                text: conv.utterances[item.turn].text.clone(),
                gold: item.gold,
                predicted: item.predicted,
                category: None,
            });
            *taken += 1;
        }
    }
    Ok(samples)
}

pub const SHEET_COLUMNS: [&str; 9] = [
    "example_id",
    "conversation_id",
    "turn",
    "fold",
    "context",
    "text",
    "gold",
    "predicted",
    "category",
];

/// Writes a tab-separated annotation sheet; the category column is left
/// empty for unreviewed samples.
pub fn write_sheet<W: Write>(samples: &[ErrorSample], writer: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().delimiter(b'\t').from_writer(writer);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    out.write_record(SHEET_COLUMNS).map_err(csv_err)?;
    for s in samples {
        out.write_record([
            s.example_id.as_str(),
            s.conversation_id.as_str(),
            &s.turn.to_string(),
            &s.fold.map(|f| f.to_string()).unwrap_or_default(),
            s.context.as_str(),
            s.text.as_str(),
            s.gold.as_str(),
            s.predicted.as_str(),
            s.category.map(|c| c.display_name()).unwrap_or(""),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads an annotation sheet. Categories are optional here; [`tally_errors`]
/// requires them.
pub fn read_sheet<R: Read>(reader: R) -> Result<Vec<ErrorSample>> {
    let mut input = csv::ReaderBuilder::new().delimiter(b'\t').from_reader(reader);
    let headers = input
        .headers()
        .map_err(|e| Error::SheetRow { row: 1, message: e.to_string() })?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::SheetRow { row: 1, message: format!("missing column {name:?}") })
    };
    let cols: Vec<usize> = SHEET_COLUMNS.iter().map(|c| column(c)).collect::<Result<_>>()?;
    let mut samples = Vec::new();
    for record in input.records() {
        let record = record.map_err(|e| Error::SheetRow {
            row: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let bad = |message: String| Error::SheetRow { row, message };
        let field = |i: usize| record.get(cols[i]).unwrap_or("");
        let category = match field(8).trim() {
            "" => None,
            text => Some(text.parse::<ErrorCategory>().map_err(|e| bad(e.to_string()))?),
        };
        let fold = match field(3).trim() {
            "" => None,
            f => Some(f.parse().map_err(|e| bad(format!("fold: {e}")))?),
        };
        let sample = ErrorSample {
            example_id: field(0).to_string(),
            conversation_id: field(1).to_string(),
            turn: field(2).trim().parse().map_err(|e| bad(format!("turn: {e}")))?,
            fold,
            context: field(4).to_string(),
            text: field(5).to_string(),
            gold: field(6).trim().parse().map_err(|e: Error| bad(e.to_string()))?,
            predicted: field(7).trim().parse().map_err(|e: Error| bad(e.to_string()))?,
            category,
        };
        if sample.gold == sample.predicted {
            return Err(bad("gold and predicted labels agree".into()));
        }
        samples.push(sample);
    }
    Ok(samples)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TallyRow {
    pub gold: FaceActLabel,
    pub counts: BTreeMap<ErrorCategory, u64>,
    pub total: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTally {
    pub rows: Vec<TallyRow>,
    pub category_totals: BTreeMap<ErrorCategory, u64>,
    pub total: u64,
    /// Share of samples whose gold label was judged wrong.
    pub gold_error_rate: f64,
    /// Share of samples whose prediction was judged right.
    pub prediction_correct_rate: f64,
}

fn zero_counts() -> BTreeMap<ErrorCategory, u64> {
    ErrorCategory::ALL.iter().map(|c| (*c, 0)).collect()
}

/// Counts reviewed samples by gold label and category. Every sample must
/// carry a category; `rows` lists gold labels that have samples, in label
/// order.
pub fn tally_errors(samples: &[ErrorSample]) -> Result<ErrorTally> {
    let mut rows: BTreeMap<FaceActLabel, BTreeMap<ErrorCategory, u64>> = BTreeMap::new();
    let mut category_totals = zero_counts();
    for (i, sample) in samples.iter().enumerate() {
        let category = sample.category.ok_or_else(|| Error::SheetRow {
            row: i + 2,
            message: format!("{} has no category", sample.example_id),
        })?;
        *rows.entry(sample.gold).or_insert_with(zero_counts).get_mut(&category).expect("seeded") += 1;
        *category_totals.get_mut(&category).expect("seeded") += 1;
    }
    let total = samples.len() as u64;
    let share = |pred: fn(ErrorCategory) -> bool| {
        if total == 0 {
            0.0
        } else {
            category_totals.iter().filter(|(c, _)| pred(**c)).map(|(_, n)| n).sum::<u64>() as f64 / total as f64
        }
    };
    Ok(ErrorTally {
        gold_error_rate: share(ErrorCategory::gold_error),
        prediction_correct_rate: share(ErrorCategory::prediction_correct),
        rows: rows
            .into_iter()
            .map(|(gold, counts)| TallyRow {
                total: counts.values().sum(),
                gold,
                counts,
            })
            .collect(),
        category_totals,
        total,
    })
}

/// Plain-text category-by-gold-label table.
pub fn render_tally(tally: &ErrorTally) -> String {
    use std::fmt::Write as _;
    let mut out = format!("{:<28}", "");
    for row in &tally.rows {
        let _ = write!(out, " {:>6}", row.gold.as_str());
    }
    let _ = writeln!(out, " {:>6}", "total");
    for category in ErrorCategory::ALL {
        let _ = write!(out, "{:<28}", category.display_name());
        for row in &tally.rows {
            let _ = write!(out, " {:>6}", row.counts[&category]);
        }
        let _ = writeln!(out, " {:>6}", tally.category_totals[&category]);
    }
    let _ = write!(out, "{:<28}", "Total");
    for row in &tally.rows {
        let _ = write!(out, " {:>6}", row.total);
    }
    let _ = writeln!(out, " {:>6}", tally.total);
    let _ = writeln!(out, "gold error rate: {:.1}%", 100.0 * tally.gold_error_rate);
    let _ = writeln!(out, "prediction actually correct: {:.1}%", 100.0 * tally.prediction_correct_rate);
    out
}

/// Outcome of one prediction relative to a target label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OutcomeCell {
    TP,
    FP,
    TN,
    FN,
}

pub fn outcome(gold: FaceActLabel, predicted: FaceActLabel, target: FaceActLabel) -> OutcomeCell {
    match (gold == target, predicted == target) {
        (true, true) => OutcomeCell::TP,
        (true, false) => OutcomeCell::FN,
        (false, true) => OutcomeCell::FP,
        (false, false) => OutcomeCell::TN,
    }
}

/// The four changes possible between two systems for a fixed gold label.
pub const TRANSITIONS: [(OutcomeCell, OutcomeCell); 4] = [
    (OutcomeCell::FN, OutcomeCell::TP),
    (OutcomeCell::TP, OutcomeCell::FN),
    (OutcomeCell::FP, OutcomeCell::TN),
    (OutcomeCell::TN, OutcomeCell::FP),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagShare {
    pub tag: String,
    pub count: u64,
    /// Fraction of the counted utterances, in `[0, 1]`.
    pub share: f64,
}

/// Dialog-act distribution over a set of utterances. Only tags in the
/// configured subset are counted; `excluded` holds the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagDistribution {
    pub tags: Vec<TagShare>,
    pub counted: u64,
    pub excluded: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionCell {
    pub from: OutcomeCell,
    pub to: OutcomeCell,
    pub count: u64,
    pub distribution: TagDistribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftReport {
    pub target: FaceActLabel,
    pub total: u64,
    pub unchanged: u64,
    pub transitions: Vec<TransitionCell>,
    /// Distribution over every utterance.
    pub overall: TagDistribution,
    /// Distribution over utterances whose gold label is the target.
    pub target_conditional: TagDistribution,
    pub target_count: u64,
    pub tag_subset: Vec<String>,
}

impl ShiftReport {
    pub fn cell(&self, from: OutcomeCell, to: OutcomeCell) -> Option<&TransitionCell> {
        self.transitions.iter().find(|t| t.from == from && t.to == to)
    }
}

fn distribution<'a>(tags: impl Iterator<Item = &'a str>, subset: &[String]) -> TagDistribution {
    let mut counts: Vec<u64> = vec![0; subset.len()];
    let mut excluded = 0;
    for tag in tags {
        match subset.iter().position(|s| s == tag) {
            Some(i) => counts[i] += 1,
            None => excluded += 1,
        }
    }
    let counted: u64 = counts.iter().sum();
    TagDistribution {
        tags: subset
            .iter()
            .zip(counts)
            .map(|(tag, count)| TagShare {
                tag: tag.clone(),
                count,
                share: if counted == 0 { 0.0 } else { count as f64 / counted as f64 },
            })
            .collect(),
        counted,
        excluded,
    }
}

/// Inputs to [`shift_analysis`], aligned by position.
pub struct ShiftInput<'a> {
    pub gold: &'a [FaceActLabel],
    pub system_a: &'a [FaceActLabel],
    pub system_b: &'a [FaceActLabel],
    pub dialog_acts: &'a [String],
}

/// Buckets each utterance by how its outcome for `target` changes from
/// system A to system B, with the dialog-act distribution of every bucket.
/// Tags are collapsed through `tagset`; `subset` restricts the tags counted
/// (all collapsed tags when `None`).
pub fn shift_analysis(
    input: &ShiftInput<'_>,
    target: FaceActLabel,
    tagset: &TagSet,
    subset: Option<&[String]>,
) -> Result<ShiftReport> {
    let n = input.gold.len();
    for len in [input.system_a.len(), input.system_b.len(), input.dialog_acts.len()] {
        if len != n {
            return Err(Error::LengthMismatch { left: n, right: len });
        }
    }
    let subset: Vec<String> = match subset {
        Some(s) => s.to_vec(),
        None => tagset.collapsed_tags().into_iter().map(String::from).collect(),
    };
    let collapsed: Vec<&str> = input.dialog_acts.iter().map(|t| tagset.collapse(t)).collect();

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); TRANSITIONS.len()];
    let mut unchanged = 0;
    for i in 0..n {
        let a = outcome(input.gold[i], input.system_a[i], target);
        let b = outcome(input.gold[i], input.system_b[i], target);
        match TRANSITIONS.iter().position(|&(from, to)| from == a && to == b) {
            Some(t) => members[t].push(i),
            None => unchanged += 1,
        }
    }
    let transitions = TRANSITIONS
        .iter()
        .zip(members)
        .map(|(&(from, to), idx)| TransitionCell {
            from,
            to,
            count: idx.len() as u64,
            distribution: distribution(idx.iter().map(|&i| collapsed[i]), &subset),
        })
        .collect();
    let target_idx: Vec<usize> = (0..n).filter(|&i| input.gold[i] == target).collect();
    Ok(ShiftReport {
        target,
        total: n as u64,
        unchanged,
        transitions,
        overall: distribution(collapsed.iter().copied(), &subset),
        target_conditional: distribution(target_idx.iter().map(|&i| collapsed[i]), &subset),
        target_count: target_idx.len() as u64,
        tag_subset: subset,
    })
}

/// Percent table in the layout: tags as rows; All, target, then the four
/// transition cells as columns; a final count row.
pub fn render_shift(report: &ShiftReport) -> String {
    use std::fmt::Write as _;
    let pct = |d: &TagDistribution, i: usize| format!("{:.0}%", 100.0 * d.tags[i].share);
    let mut headers = vec!["All".to_string(), report.target.as_str().to_string()];
    headers.extend(report.transitions.iter().map(|t| format!("{:?} to {:?}", t.from, t.to)));
    let mut out = format!("{:<12}", "");
    for h in &headers {
        let _ = write!(out, " {h:>9}");
    }
    out.push('\n');
    for (i, tag) in report.tag_subset.iter().enumerate() {
        let _ = write!(out, "{tag:<12} {:>9} {:>9}", pct(&report.overall, i), pct(&report.target_conditional, i));
        for t in &report.transitions {
            let _ = write!(out, " {:>9}", pct(&t.distribution, i));
        }
        out.push('\n');
    }
    let _ = write!(out, "{:<12} {:>9} {:>9}", "Count", "-", report.target_count);
    for t in &report.transitions {
        let _ = write!(out, " {:>9}", t.count);
    }
    out.push('\n');
    out
}
