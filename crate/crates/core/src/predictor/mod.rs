//! Producing label strings for examples and mapping them onto the label set.

mod baseline;
mod external;
mod repair;

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::example::Example;
use crate::label::FaceActLabel;

pub use baseline::{tokenize, train_baseline, BaselineModel, Prediction, DEFAULT_ALPHA};
pub use external::{
    read_responses, run_external, write_requests, ExternalPredictorConfig, FileExchangeConfig,
    PredictRequest, PredictResponse, SubprocessConfig, DEFAULT_WINDOW,
};
pub use repair::{levenshtein, repair_label, Repair};

/// Unfiltered model output for one example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawPrediction {
    pub example_id: String,
    pub output: String,
}

/// A raw prediction after repair onto the task's label set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub example_id: String,
    pub raw: String,
    pub label: String,
    pub distance: usize,
    pub repaired: bool,
    pub tie_broken: bool,
}

impl PredictionRecord {
    pub fn face_act(&self) -> Result<FaceActLabel> {
        self.label.parse()
    }
}

/// Repairs a raw prediction against `labelset`, breaking distance ties by
/// `train_freqs`.
pub fn repair_prediction(
    raw: RawPrediction,
    labelset: &[String],
    train_freqs: &BTreeMap<String, u64>,
) -> PredictionRecord {
    let fix = repair_label(&raw.output, labelset, train_freqs);
    PredictionRecord {
        example_id: raw.example_id,
        repaired: fix.distance > 0 || raw.output != fix.label,
        raw: raw.output,
        label: fix.label,
        distance: fix.distance,
        tie_broken: fix.tie_broken,
    }
}

/// Target counts over a training set.
pub fn label_frequencies(examples: &[Example]) -> BTreeMap<String, u64> {
    let mut freqs = BTreeMap::new();
    for example in examples {
        *freqs.entry(example.target.clone()).or_insert(0) += 1;
    }
    freqs
}

pub fn write_records<W: Write>(records: &[PredictionRecord], mut writer: W) -> Result<()> {
    for record in records {
        serde_json::to_writer(&mut writer, record).map_err(|e| Error::Io(std::io::Error::other(e)))?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_records<R: BufRead>(reader: R) -> Result<Vec<PredictionRecord>> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(
            serde_json::from_str(&line).map_err(|e| Error::malformed(idx + 1, e.to_string()))?,
        );
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table2_freqs() -> BTreeMap<String, u64> {
        [
            ("other", 4300),
            ("hpos+", 2844),
            ("spos+", 1589),
            ("hneg-", 1073),
            ("hpos-", 334),
            ("hneg+", 305),
            ("sneg+", 259),
            ("spos-", 12),
            ("sneg-", 0),
        ]
        .iter()
        .map(|(l, c)| (l.to_string(), *c))
        .collect()
    }

    #[test]
    fn repaired_flag() {
        let labels = FaceActLabel::label_strings();
        let freqs = table2_freqs();
        let exact = repair_prediction(
            RawPrediction { example_id: "a".into(), output: "sneg+".into() },
            &labels,
            &freqs,
        );
        assert!(!exact.repaired);
        assert_eq!(exact.distance, 0);
        let cased = repair_prediction(
            RawPrediction { example_id: "a".into(), output: " SNEG+ ".into() },
            &labels,
            &freqs,
        );
        assert!(cased.repaired);
        assert_eq!(cased.distance, 0);
        assert_eq!(cased.label, "sneg+");
        let broken = repair_prediction(
            RawPrediction { example_id: "a".into(), output: "spos=".into() },
            &labels,
            &freqs,
        );
        assert!(broken.repaired);
        assert_eq!(broken.distance, 1);
        assert_eq!(broken.label, "spos+");
        assert!(broken.tie_broken);
    }

    #[test]
    fn records_round_trip() {
        let records = vec![PredictionRecord {
            example_id: "c:1".into(),
            raw: "hpos".into(),
            label: "hpos+".into(),
            distance: 1,
            repaired: true,
            tie_broken: true,
        }];
        let mut buf = Vec::new();
        write_records(&records, &mut buf).unwrap();
        assert_eq!(read_records(buf.as_slice()).unwrap(), records);
        assert_eq!(records[0].face_act().unwrap(), FaceActLabel::HPosPlus);
    }
}
