//! Face-act tagging experiments: corpus handling, example construction,
//! predictors, scoring, significance testing and error analysis.

pub mod corpus;
pub mod error;
pub mod error_analysis;
pub mod example;
pub mod label;
pub mod metrics;
pub mod predictor;
pub mod scoring;
pub mod seeded;
pub mod stats;
pub mod tagset;

pub use error::{Error, Result};
pub use label::{FaceActLabel, SpeakerRole};
