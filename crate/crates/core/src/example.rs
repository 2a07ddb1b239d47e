//! Builds serialized (input, target) examples from a corpus.
//!
//! Every rendered turn is `"<ROLE>: <text>"`; the target utterance is the
//! last line, preceded by up to `context_size` earlier turns of the same
//! conversation. Text-augmented inputs append ` (<Tag>)` to each line and
//! multi-task inputs start with a `face acts:` or `dialog acts:` line.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Conversation, Corpus, Utterance};
use crate::error::{Error, Result};
use crate::seeded::{keyed_u64, shuffle_by_key};

pub const DEFAULT_CONTEXT_SIZE: usize = 2;
pub const DEFAULT_SAMPLE_FRACTION: f64 = 0.10;

/// Which prediction task an example belongs to. The display form is the
/// task name used in multi-task prefixes and on the predictor wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "face acts")]
    FaceActs,
    #[serde(rename = "dialog acts")]
    DialogActs,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::FaceActs => "face acts",
            Task::DialogActs => "dialog acts",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExampleVariant {
    Fos,
    Ta,
    MtlFa,
    MtlDa,
}

impl ExampleVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            ExampleVariant::Fos => "FOS",
            ExampleVariant::Ta => "TA",
            ExampleVariant::MtlFa => "MTL_FA",
            ExampleVariant::MtlDa => "MTL_DA",
        }
    }

    pub fn task(self) -> Task {
        match self {
            ExampleVariant::MtlDa => Task::DialogActs,
            _ => Task::FaceActs,
        }
    }

    fn prefix(self) -> Option<&'static str> {
        match self {
            ExampleVariant::MtlFa | ExampleVariant::MtlDa => Some(self.task().name()),
            _ => None,
        }
    }
}

impl FromStr for ExampleVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "FOS" => Ok(ExampleVariant::Fos),
            "TA" => Ok(ExampleVariant::Ta),
            "MTL_FA" => Ok(ExampleVariant::MtlFa),
            "MTL_DA" => Ok(ExampleVariant::MtlDa),
            _ => Err(Error::InvalidArgument(format!("unknown variant {s:?}"))),
        }
    }
}

impl fmt::Display for ExampleVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub id: String,
    pub input: String,
    pub target: String,
    pub variant: ExampleVariant,
    /// Fold of the source conversation; `None` for auxiliary dialog-act
    /// examples, which join the training data of every fold.
    pub fold: Option<usize>,
}

/// Example id for an utterance: `"<conversation_id>:<turn>"`.
pub fn example_id(conversation_id: &str, turn: usize) -> String {
    format!("{conversation_id}:{turn}")
}

fn render_turn(utt: &Utterance, with_tag: bool) -> Result<String> {
    // Embedded line breaks would corrupt the one-turn-per-line layout.
    let text: String = utt
        .text
        .chars()
        .map(|c| if c == '\n' || c == '\r' { ' ' } else { c })
        .collect();
    let mut line = format!("{}: {}", utt.speaker, text);
    if with_tag {
        let tag = utt.dialog_act.as_ref().ok_or_else(|| Error::MissingDialogAct {
            conversation_id: utt.conversation_id.clone(),
            turn: utt.turn,
        })?;
        line.push_str(" (");
        line.push_str(tag);
        line.push(')');
    }
    Ok(line)
}

fn conversation_examples(
    conv: &Conversation,
    variant: ExampleVariant,
    context_size: usize,
) -> Result<Vec<Example>> {
    let tagged = variant == ExampleVariant::Ta;
    let mut out = Vec::new();
    for (idx, utt) in conv.utterances.iter().enumerate() {
        let target = match variant {
            ExampleVariant::MtlDa => match &utt.dialog_act {
                Some(tag) => tag.clone(),
                None => {
                    return Err(Error::MissingDialogAct {
                        conversation_id: utt.conversation_id.clone(),
                        turn: utt.turn,
                    })
                }
            },
            _ => match utt.face_act {
                Some(label) => label.as_str().to_string(),
                None => continue,
            },
        };
        let start = idx.saturating_sub(context_size);
        let mut lines = Vec::with_capacity(idx - start + 2);
        if let Some(prefix) = variant.prefix() {
            lines.push(format!("{prefix}:"));
        }
        for turn in &conv.utterances[start..=idx] {
            lines.push(render_turn(turn, tagged)?);
        }
        out.push(Example {
            id: example_id(&conv.id, utt.turn),
            input: lines.join("\n"),
            target,
            variant,
            fold: conv.fold,
        });
    }
    Ok(out)
}

/// One example per labeled utterance (per dialog-act-tagged utterance for
/// `MTL_DA`), in corpus order.
pub fn build_examples(
    corpus: &Corpus,
    variant: ExampleVariant,
    context_size: usize,
) -> Result<Vec<Example>> {
    if !corpus.is_deduplicated() {
        return Err(Error::InvalidArgument(
            "corpus has conversations in several folds; deduplicate folds first".into(),
        ));
    }
    let mut examples = Vec::new();
    for conv in &corpus.conversations {
        examples.extend(conversation_examples(conv, variant, context_size)?);
    }
    Ok(examples)
}

/// Conversation-level sampling settings for multi-task mixing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixPlan {
    pub sample_fraction: f64,
    pub seed: u64,
    pub context_size: usize,
}

impl Default for MixPlan {
    fn default() -> Self {
        MixPlan {
            sample_fraction: DEFAULT_SAMPLE_FRACTION,
            seed: 0,
            context_size: DEFAULT_CONTEXT_SIZE,
        }
    }
}

/// Picks `floor(fraction * n)` conversation ids uniformly without
/// replacement. Each conversation's draw depends only on `(seed, id)`.
pub fn sample_conversations<'a>(ids: &[&'a str], fraction: f64, seed: u64) -> Result<Vec<&'a str>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "sample fraction {fraction} is outside (0, 1]"
        )));
    }
    let take = (fraction * ids.len() as f64).floor() as usize;
    if take == 0 {
        return Err(Error::EmptySample {
            fraction,
            available: ids.len(),
        });
    }
    let mut keyed: Vec<(u64, &str)> = ids.iter().map(|id| (keyed_u64(seed, &[id]), *id)).collect();
    keyed.sort_unstable();
    Ok(keyed.into_iter().take(take).map(|(_, id)| id).collect())
}

/// Face-act examples plus dialog-act examples from a sampled subset of the
/// dialog-act corpus, shuffled deterministically under the plan's seed.
pub fn mix_multitask(fa: &[Example], da_corpus: &Corpus, plan: &MixPlan) -> Result<Vec<Example>> {
    if let Some(bad) = fa.iter().find(|e| e.variant != ExampleVariant::MtlFa) {
        return Err(Error::InvalidArgument(format!(
            "example {} is {}, expected MTL_FA",
            bad.id, bad.variant
        )));
    }
    let ids = da_corpus.conversation_ids();
    let chosen: BTreeSet<&str> = sample_conversations(&ids, plan.sample_fraction, plan.seed)?
        .into_iter()
        .collect();
    let mut mixed: Vec<Example> = fa.to_vec();
    let mut seen = BTreeSet::new();
    for conv in &da_corpus.conversations {
        if chosen.contains(conv.id.as_str()) && seen.insert(conv.id.as_str()) {
            let mut examples = conversation_examples(conv, ExampleVariant::MtlDa, plan.context_size)?;
            for example in &mut examples {
                example.fold = None;
            }
            mixed.extend(examples);
        }
    }
    shuffle_by_key(&mut mixed, plan.seed, |e| format!("{}|{}", e.variant, e.id));
    Ok(mixed)
}

/// Utterance counts per task in a mixed example list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixSummary {
    pub face_act_examples: usize,
    pub dialog_act_examples: usize,
    /// Dialog-act examples per face-act example.
    pub ratio: f64,
}

pub fn mix_summary(examples: &[Example]) -> MixSummary {
    let da = examples.iter().filter(|e| e.variant.task() == Task::DialogActs).count();
    let fa = examples.len() - da;
    MixSummary {
        face_act_examples: fa,
        dialog_act_examples: da,
        ratio: if fa == 0 { 0.0 } else { da as f64 / fa as f64 },
    }
}

pub fn write_examples<W: Write>(examples: &[Example], mut writer: W) -> Result<()> {
    for example in examples {
        serde_json::to_writer(&mut writer, example).map_err(|e| Error::Io(std::io::Error::other(e)))?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_examples<R: BufRead>(reader: R) -> Result<Vec<Example>> {
    let mut examples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let example: Example =
            serde_json::from_str(&line).map_err(|e| Error::malformed(idx + 1, e.to_string()))?;
        if example.input.is_empty() {
            return Err(Error::malformed(idx + 1, "empty input"));
        }
        examples.push(example);
    }
    Ok(examples)
}
