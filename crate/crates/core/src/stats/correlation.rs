//! Pearson and phi correlation, and the dialog-act by face-act matrix.

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::label::FaceActLabel;

/// Statistic used for every dialog-act by face-act cell.
pub const DA_FA_STATISTIC: &str = "phi coefficient over per-utterance indicator vectors";

/// Sample Pearson correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::InvalidArgument("correlation needs at least two points".into()));
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantVector);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Phi coefficient: Pearson correlation of two 0/1 vectors.
pub fn phi_correlation(x: &[bool], y: &[bool]) -> Result<f64> {
    let xs: Vec<f64> = x.iter().map(|&b| f64::from(u8::from(b))).collect();
    let ys: Vec<f64> = y.iter().map(|&b| f64::from(u8::from(b))).collect();
    pearson(&xs, &ys)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCell {
    pub da_tag: String,
    pub fa_label: FaceActLabel,
    /// `None` when either indicator is constant over the corpus.
    pub r: Option<f64>,
    pub n: usize,
}

/// Phi for every (dialog act, face act) pair. Tags come from the corpus
/// tagset when it has one (collapsed when `collapse` is set), otherwise from
/// the observed tags in sorted order.
pub fn da_fa_matrix(corpus: &Corpus, collapse: bool) -> Result<Vec<CorrelationCell>> {
    let mut pairs: Vec<(String, FaceActLabel)> = Vec::with_capacity(corpus.num_utterances());
    for utt in corpus.utterances() {
        let tag = utt.dialog_act.as_ref().ok_or_else(|| Error::MissingDialogAct {
            conversation_id: utt.conversation_id.clone(),
            turn: utt.turn,
        })?;
        let label = utt.face_act.ok_or_else(|| Error::MissingFaceAct {
            conversation_id: utt.conversation_id.clone(),
            turn: utt.turn,
        })?;
        let tag = match (&corpus.tagset, collapse) {
            (Some(ts), true) => ts.collapse(tag).to_string(),
            _ => tag.clone(),
        };
        pairs.push((tag, label));
    }
    let tags: Vec<String> = match &corpus.tagset {
        Some(ts) if collapse => ts.collapsed_tags().into_iter().map(String::from).collect(),
        Some(ts) => ts.tags.clone(),
        None => {
            let mut observed: Vec<String> = pairs.iter().map(|(t, _)| t.clone()).collect();
            observed.sort();
            observed.dedup();
            observed
        }
    };
    let mut cells = Vec::with_capacity(tags.len() * FaceActLabel::ALL.len());
    for tag in &tags {
        let x: Vec<bool> = pairs.iter().map(|(t, _)| t == tag).collect();
        for label in FaceActLabel::ALL {
            let y: Vec<bool> = pairs.iter().map(|(_, l)| *l == label).collect();
            let r = match phi_correlation(&x, &y) {
                Ok(r) => Some(r),
                Err(Error::ConstantVector) => None,
                Err(e) => return Err(e),
            };
            cells.push(CorrelationCell {
                da_tag: tag.clone(),
                fa_label: label,
                r,
                n: pairs.len(),
            });
        }
    }
    Ok(cells)
}
