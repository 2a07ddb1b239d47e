//! Joining prediction records to gold annotations and scoring per fold.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::example::example_id;
use crate::label::FaceActLabel;
use crate::metrics::{average_folds, face_act_confusion, report, MetricsReport};
use crate::predictor::PredictionRecord;

/// A scored utterance: gold and predicted face act with its location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignedPrediction {
    pub example_id: String,
    pub conversation_id: String,
    pub turn: usize,
    pub fold: Option<usize>,
    pub gold: FaceActLabel,
    pub predicted: FaceActLabel,
    pub dialog_act: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    /// In corpus order.
    pub items: Vec<AlignedPrediction>,
    /// Labeled utterances without a prediction record.
    pub unpredicted: usize,
}

/// Matches face-act prediction records to labeled utterances by example id.
pub fn align(corpus: &Corpus, records: &[PredictionRecord]) -> Result<Alignment> {
    let mut by_id: HashMap<&str, &PredictionRecord> = HashMap::with_capacity(records.len());
    for record in records {
        if by_id.insert(record.example_id.as_str(), record).is_some() {
            return Err(Error::InvalidArgument(format!(
                "duplicate prediction for {}",
                record.example_id
            )));
        }
    }
    let mut items = Vec::with_capacity(records.len());
    let mut unpredicted = 0;
    for conv in &corpus.conversations {
        for utt in &conv.utterances {
            let Some(gold) = utt.face_act else { continue };
            let id = example_id(&conv.id, utt.turn);
            match by_id.remove(id.as_str()) {
                Some(record) => items.push(AlignedPrediction {
                    predicted: record.face_act()?,
                    example_id: id,
                    conversation_id: conv.id.clone(),
                    turn: utt.turn,
                    fold: conv.fold,
                    gold,
                    dialog_act: utt.dialog_act.clone(),
                }),
                None => unpredicted += 1,
            }
        }
    }
    if let Some(stray) = by_id.keys().min() {
        return Err(Error::InvalidArgument(format!(
            "prediction {stray} matches no labeled utterance"
        )));
    }
    Ok(Alignment { items, unpredicted })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: Option<usize>,
    pub report: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub folds: Vec<FoldReport>,
    pub average: MetricsReport,
}

/// Scores each fold separately and averages the fold reports.
pub fn evaluate_folds(items: &[AlignedPrediction], excl: &BTreeSet<String>) -> Result<Evaluation> {
    let mut by_fold: BTreeMap<Option<usize>, Vec<(FaceActLabel, FaceActLabel)>> = BTreeMap::new();
    for item in items {
        by_fold.entry(item.fold).or_default().push((item.gold, item.predicted));
    }
    let folds: Vec<FoldReport> = by_fold
        .into_iter()
        .map(|(fold, pairs)| FoldReport {
            fold,
            report: report(&face_act_confusion(&pairs), excl),
        })
        .collect();
    let reports: Vec<MetricsReport> = folds.iter().map(|f| f.report.clone()).collect();
    let average = average_folds(&reports)?;
    Ok(Evaluation { folds, average })
}
