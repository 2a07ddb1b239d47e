use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised while loading data, preparing examples, or talking to an
/// external predictor.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("unknown speaker {0:?} (no role mapping configured for it)")]
    UnknownSpeaker(String),

    #[error("unknown dialog act {tag:?} for tagset {tagset:?}")]
    UnknownDialogAct { tag: String, tagset: String },

    #[error("duplicate utterance: conversation {conversation_id:?} turn {turn}")]
    DuplicateTurn { conversation_id: String, turn: usize },

    #[error("conversation {conversation_id:?}: turns are not contiguous from 0 (missing turn {expected})")]
    NonContiguousTurns { conversation_id: String, expected: usize },

    #[error("invalid tagset {id:?}: {message}")]
    InvalidTagSet { id: String, message: String },

    #[error("utterance {conversation_id}:{turn} has no dialog act annotation")]
    MissingDialogAct { conversation_id: String, turn: usize },

    #[error("utterance {conversation_id}:{turn} has no face act annotation")]
    MissingFaceAct { conversation_id: String, turn: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sampling selected zero conversations (fraction {fraction} of {available})")]
    EmptySample { fraction: f64, available: usize },

    #[error("empty vocabulary: training inputs contain no tokens")]
    EmptyVocabulary,

    #[error("label {0:?} is not in the label set")]
    LabelOutsideSet(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("vector is constant; correlation is undefined")]
    ConstantVector,

    #[error("degenerate block design: {blocks} blocks x {treatments} treatments (need at least 2 x 2)")]
    DegenerateDesign { blocks: usize, treatments: usize },

    #[error("incomplete gamma evaluation did not converge within {0} iterations")]
    NonConvergence(usize),

    #[error("annotation sheet row {row}: {message}")]
    SheetRow { row: usize, message: String },

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("no response for request id {0:?}")]
    MissingResponse(String),

    #[error("external predictor timed out after {0:?}")]
    Timeout(std::time::Duration),

    #[error("external predictor exited with status {0}")]
    ProcessExit(String),
}

impl Error {
    /// Whether the failure comes from I/O or the predictor boundary rather
    /// than from invalid input data.
    pub fn is_io_or_protocol(&self) -> bool {
        matches!(
            self,
            Error::Io(_)
                | Error::Protocol(_)
                | Error::MissingResponse(_)
                | Error::Timeout(_)
                | Error::ProcessExit(_)
        )
    }

    pub(crate) fn malformed(line: usize, message: impl Into<String>) -> Self {
        Error::MalformedLine {
            line,
            message: message.into(),
        }
    }
}
