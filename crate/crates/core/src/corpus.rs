//! Dialog corpora: parsing, validation, canonical JSONL persistence, label
//! histograms, and fold deduplication.
//!
//! The canonical on-disk form is one JSON object per utterance:
//!
//! ```text
//! {"conversation_id":"c1","turn":0,"speaker":"ER","text":"hi","face_act":"other","dialog_act":null,"fold":0}
//! ```
//!
//! A conversation that occurs in several folds is represented by one
//! [`Conversation`] per fold until [`dedupe_folds`] keeps only the first.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{FaceActLabel, SpeakerRole};
use crate::tagset::TagSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utterance {
    pub conversation_id: String,
    pub turn: usize,
    pub speaker: SpeakerRole,
    pub text: String,
    pub face_act: Option<FaceActLabel>,
    pub dialog_act: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conversation {
    pub id: String,
    pub fold: Option<usize>,
    pub utterances: Vec<Utterance>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    pub conversations: Vec<Conversation>,
    pub tagset: Option<TagSet>,
}

impl Corpus {
    /// Builds a corpus from already-grouped conversations, checking every
    /// structural invariant.
    pub fn new(conversations: Vec<Conversation>, tagset: Option<TagSet>) -> Result<Self> {
        let mut seen: HashMap<(&str, Option<usize>), ()> = HashMap::new();
        for conv in &conversations {
            if conv.utterances.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "conversation {:?} has no utterances",
                    conv.id
                )));
            }
            if seen.insert((conv.id.as_str(), conv.fold), ()).is_some() {
                return Err(Error::DuplicateTurn {
                    conversation_id: conv.id.clone(),
                    turn: 0,
                });
            }
            for (expected, utt) in conv.utterances.iter().enumerate() {
                if utt.conversation_id != conv.id {
                    return Err(Error::InvalidArgument(format!(
                        "utterance of {:?} filed under conversation {:?}",
                        utt.conversation_id, conv.id
                    )));
                }
                if utt.turn != expected {
                    return Err(Error::NonContiguousTurns {
                        conversation_id: conv.id.clone(),
                        expected,
                    });
                }
                if let (Some(tagset), Some(tag)) = (&tagset, &utt.dialog_act) {
                    tagset.tag(tag)?;
                }
            }
        }
        Ok(Corpus {
            conversations,
            tagset,
        })
    }

    pub fn utterances(&self) -> impl Iterator<Item = &Utterance> {
        self.conversations.iter().flat_map(|c| c.utterances.iter())
    }

    pub fn num_utterances(&self) -> usize {
        self.conversations.iter().map(|c| c.utterances.len()).sum()
    }

    pub fn num_labeled(&self) -> usize {
        self.utterances().filter(|u| u.face_act.is_some()).count()
    }

    /// Distinct conversation ids in first-appearance order.
    pub fn conversation_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for conv in &self.conversations {
            if seen.insert(conv.id.as_str()) {
                ids.push(&conv.id);
            }
        }
        ids
    }

    /// All folds a conversation appears in, ascending.
    pub fn folds_of(&self, conversation_id: &str) -> Vec<usize> {
        let mut folds: Vec<usize> = self
            .conversations
            .iter()
            .filter(|c| c.id == conversation_id)
            .filter_map(|c| c.fold)
            .collect();
        folds.sort_unstable();
        folds
    }

    /// Conversation id to fold. Only meaningful after deduplication; for a
    /// conversation with several folds the lowest is reported.
    pub fn fold_of(&self) -> BTreeMap<String, usize> {
        let mut map = BTreeMap::new();
        for conv in &self.conversations {
            if let Some(fold) = conv.fold {
                let entry = map.entry(conv.id.clone()).or_insert(fold);
                *entry = (*entry).min(fold);
            }
        }
        map
    }

    /// Distinct fold indices, ascending.
    pub fn folds(&self) -> Vec<usize> {
        let mut folds: Vec<usize> = self.conversations.iter().filter_map(|c| c.fold).collect();
        folds.sort_unstable();
        folds.dedup();
        folds
    }

    /// Whether every conversation id occurs exactly once.
    pub fn is_deduplicated(&self) -> bool {
        self.conversation_ids().len() == self.conversations.len()
    }
}

/// Which field of a delimited row holds a value: a header name or a 0-based
/// column index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub conversation_id: ColumnRef,
    pub turn: ColumnRef,
    pub speaker: ColumnRef,
    pub text: ColumnRef,
    #[serde(default)]
    pub face_act: Option<ColumnRef>,
    #[serde(default)]
    pub dialog_act: Option<ColumnRef>,
    #[serde(default)]
    pub fold: Option<ColumnRef>,
}

/// Delimited-text import settings, as read from a FormatSpec JSON file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelimitedFormat {
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    pub column_map: ColumnMap,
    #[serde(default = "default_true")]
    pub has_header: bool,
}

fn default_delimiter() -> char {
    ','
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FormatSpec {
    /// Canonical JSONL, one utterance per line.
    Jsonl,
    Delimited(DelimitedFormat),
}

impl FormatSpec {
    pub fn delimited_from_json(text: &str) -> Result<Self> {
        let format: DelimitedFormat = serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("format spec JSON: {e}")))?;
        if !format.delimiter.is_ascii() {
            return Err(Error::InvalidArgument(format!(
                "delimiter {:?} must be a single ASCII character",
                format.delimiter
            )));
        }
        Ok(FormatSpec::Delimited(format))
    }
}

/// Options shared by both input formats.
#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    /// Extra speaker strings accepted and the role each maps to. `ER` and
    /// `EE` are always accepted.
    pub role_map: BTreeMap<String, SpeakerRole>,
    /// When present, every dialog act must belong to this tagset.
    pub tagset: Option<TagSet>,
}

impl ParseOptions {
    fn speaker(&self, raw: &str) -> Result<SpeakerRole> {
        if let Some(role) = self.role_map.get(raw) {
            return Ok(*role);
        }
        raw.parse()
    }
}

/// Canonical JSONL record. Field order is the serialization order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UtteranceRecord {
    conversation_id: String,
    turn: usize,
    speaker: String,
    text: String,
    #[serde(default)]
    face_act: Option<String>,
    #[serde(default)]
    dialog_act: Option<String>,
    #[serde(default)]
    fold: Option<usize>,
}

struct Row {
    line: usize,
    conversation_id: String,
    turn: usize,
    speaker: SpeakerRole,
    text: String,
    face_act: Option<FaceActLabel>,
    dialog_act: Option<String>,
    fold: Option<usize>,
}

/// Parses a corpus stream in the given format.
pub fn parse_corpus<R: BufRead>(
    reader: R,
    format: &FormatSpec,
    options: &ParseOptions,
) -> Result<Corpus> {
    let rows = match format {
        FormatSpec::Jsonl => read_jsonl_rows(reader, options)?,
        FormatSpec::Delimited(spec) => read_delimited_rows(reader, spec, options)?,
    };
    assemble(rows, options.tagset.clone())
}

fn parse_face_act(raw: Option<&str>) -> Result<Option<FaceActLabel>> {
    match raw {
        None => Ok(None),
        Some("") => Ok(None),
        Some(s) => s.parse().map(Some),
    }
}

fn read_jsonl_rows<R: BufRead>(reader: R, options: &ParseOptions) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => Error::malformed(line_no, "invalid UTF-8"),
            _ => Error::Io(e),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: UtteranceRecord =
            serde_json::from_str(&line).map_err(|e| Error::malformed(line_no, e.to_string()))?;
        rows.push(Row {
            line: line_no,
            speaker: options.speaker(&record.speaker)?,
            face_act: parse_face_act(record.face_act.as_deref())?,
            conversation_id: record.conversation_id,
            turn: record.turn,
            text: record.text,
            dialog_act: record.dialog_act.filter(|s| !s.is_empty()),
            fold: record.fold,
        });
    }
    Ok(rows)
}

fn resolve_column(
    column: &ColumnRef,
    headers: Option<&csv::StringRecord>,
) -> Result<usize> {
    match column {
        ColumnRef::Index(i) => Ok(*i),
        ColumnRef::Name(name) => headers
            .and_then(|h| h.iter().position(|field| field == name))
            .ok_or_else(|| Error::InvalidArgument(format!("column {name:?} not found in header"))),
    }
}

fn read_delimited_rows<R: BufRead>(
    reader: R,
    spec: &DelimitedFormat,
    options: &ParseOptions,
) -> Result<Vec<Row>> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .delimiter(spec.delimiter as u8)
        .has_headers(spec.has_header)
        .flexible(true)
        .from_reader(reader);
    let headers = if spec.has_header {
        Some(
            csv_reader
                .headers()
                .map_err(|e| Error::malformed(1, e.to_string()))?
                .clone(),
        )
    } else {
        None
    };
    let cols = &spec.column_map;
    let conv_col = resolve_column(&cols.conversation_id, headers.as_ref())?;
    let turn_col = resolve_column(&cols.turn, headers.as_ref())?;
    let speaker_col = resolve_column(&cols.speaker, headers.as_ref())?;
    let text_col = resolve_column(&cols.text, headers.as_ref())?;
    let optional = |c: &Option<ColumnRef>| -> Result<Option<usize>> {
        c.as_ref().map(|c| resolve_column(c, headers.as_ref())).transpose()
    };
    let face_col = optional(&cols.face_act)?;
    let da_col = optional(&cols.dialog_act)?;
    let fold_col = optional(&cols.fold)?;

    let mut rows = Vec::new();
    for result in csv_reader.records() {
        let record = result.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::malformed(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let field = |col: usize| -> Result<&str> {
            record
                .get(col)
                .ok_or_else(|| Error::malformed(line, format!("missing column {col}")))
        };
        let turn = field(turn_col)?
            .trim()
            .parse::<usize>()
            .map_err(|e| Error::malformed(line, format!("turn: {e}")))?;
        let fold = match fold_col {
            Some(col) => {
                let raw = field(col)?.trim();
                if raw.is_empty() {
                    None
                } else {
                    Some(
                        raw.parse::<usize>()
                            .map_err(|e| Error::malformed(line, format!("fold: {e}")))?,
                    )
                }
            }
            None => None,
        };
        let face_act = match face_col {
            Some(col) => parse_face_act(Some(field(col)?.trim()))?,
            None => None,
        };
        let dialog_act = match da_col {
            Some(col) => Some(field(col)?.trim().to_string()).filter(|s| !s.is_empty()),
            None => None,
        };
        rows.push(Row {
            line,
            conversation_id: field(conv_col)?.to_string(),
            turn,
            speaker: options.speaker(field(speaker_col)?.trim())?,
            text: field(text_col)?.to_string(),
            face_act,
            dialog_act,
            fold,
        });
    }
    Ok(rows)
}

fn assemble(rows: Vec<Row>, tagset: Option<TagSet>) -> Result<Corpus> {
    // Group by (conversation, fold), keeping first-appearance order.
    let mut order: Vec<(String, Option<usize>)> = Vec::new();
    let mut groups: HashMap<(String, Option<usize>), BTreeMap<usize, Row>> = HashMap::new();
    for row in rows {
        if let (Some(ts), Some(tag)) = (&tagset, &row.dialog_act) {
            ts.tag(tag).map_err(|e| Error::malformed(row.line, e.to_string()))?;
        }
        let key = (row.conversation_id.clone(), row.fold);
        let group = groups.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            BTreeMap::new()
        });
        if group.contains_key(&row.turn) {
            return Err(Error::DuplicateTurn {
                conversation_id: row.conversation_id,
                turn: row.turn,
            });
        }
        group.insert(row.turn, row);
    }

    let mut conversations = Vec::with_capacity(order.len());
    for key in order {
        let group = groups.remove(&key).expect("group recorded in order");
        for (expected, turn) in group.keys().enumerate() {
            if *turn != expected {
                return Err(Error::NonContiguousTurns {
                    conversation_id: key.0,
                    expected,
                });
            }
        }
        let utterances = group
            .into_values()
            .map(|row| Utterance {
                conversation_id: row.conversation_id,
                turn: row.turn,
                speaker: row.speaker,
                text: row.text,
                face_act: row.face_act,
                dialog_act: row.dialog_act,
            })
            .collect();
        conversations.push(Conversation {
            id: key.0,
            fold: key.1,
            utterances,
        });
    }
    Ok(Corpus {
        conversations,
        tagset,
    })
}

/// Writes the canonical JSONL form: conversations in corpus order, turns
/// ascending, LF-terminated.
pub fn write_jsonl<W: Write>(corpus: &Corpus, mut writer: W) -> Result<()> {
    for conv in &corpus.conversations {
        for utt in &conv.utterances {
            let record = UtteranceRecord {
                conversation_id: utt.conversation_id.clone(),
                turn: utt.turn,
                speaker: utt.speaker.as_str().to_string(),
                text: utt.text.clone(),
                face_act: utt.face_act.map(|l| l.as_str().to_string()),
                dialog_act: utt.dialog_act.clone(),
                fold: conv.fold,
            };
            serde_json::to_writer(&mut writer, &record)
                .map_err(|e| Error::Io(std::io::Error::other(e)))?;
            writer.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Face-act counts over labeled utterances. All nine labels are present as
/// keys, including zero counts.
pub fn label_histogram(corpus: &Corpus) -> BTreeMap<FaceActLabel, usize> {
    let mut counts: BTreeMap<FaceActLabel, usize> =
        FaceActLabel::ALL.iter().map(|l| (*l, 0)).collect();
    for label in corpus.utterances().filter_map(|u| u.face_act) {
        *counts.get_mut(&label).expect("all labels seeded") += 1;
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldRemoval {
    pub conversation_id: String,
    pub fold: Option<usize>,
    pub kept_fold: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DedupReport {
    pub removals: Vec<FoldRemoval>,
}

/// Keeps each conversation only in the lowest-numbered fold it appears in.
/// Copies without a fold assignment lose to any assigned copy.
pub fn dedupe_folds(corpus: &Corpus) -> (Corpus, DedupReport) {
    let rank = |fold: Option<usize>| fold.unwrap_or(usize::MAX);
    let mut keep: HashMap<&str, Option<usize>> = HashMap::new();
    for conv in &corpus.conversations {
        keep.entry(conv.id.as_str())
            .and_modify(|kept| {
                if rank(conv.fold) < rank(*kept) {
                    *kept = conv.fold;
                }
            })
            .or_insert(conv.fold);
    }
    let mut report = DedupReport::default();
    let mut conversations = Vec::with_capacity(keep.len());
    for conv in &corpus.conversations {
        let kept = keep[conv.id.as_str()];
        if conv.fold == kept && !conversations.iter().any(|c: &Conversation| c.id == conv.id) {
            conversations.push(conv.clone());
        } else {
            report.removals.push(FoldRemoval {
                conversation_id: conv.id.clone(),
                fold: conv.fold,
                kept_fold: kept,
            });
        }
    }
    (
        Corpus {
            conversations,
            tagset: corpus.tagset.clone(),
        },
        report,
    )
}
