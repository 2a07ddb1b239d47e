//! Run configuration: a JSON file with every field optional, then command-line
//! overrides on top.

use std::path::{Path, PathBuf};
use std::time::Duration;

use faceact_core::example::{DEFAULT_CONTEXT_SIZE, DEFAULT_SAMPLE_FRACTION};
use faceact_core::predictor::{
    ExternalPredictorConfig, FileExchangeConfig, SubprocessConfig, DEFAULT_ALPHA, DEFAULT_WINDOW,
};
use faceact_core::stats::DEFAULT_ALPHA_LEVELS;
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PredictorChoice {
    Baseline {
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    Subprocess {
        program: String,
        #[serde(default)]
        args: Vec<String>,
        #[serde(default)]
        timeout_secs: Option<f64>,
        #[serde(default = "default_window")]
        window: usize,
    },
    Files {
        requests: PathBuf,
        responses: PathBuf,
        #[serde(default)]
        command: Option<Vec<String>>,
    },
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn default_window() -> usize {
    DEFAULT_WINDOW
}

impl PredictorChoice {
    pub fn external(&self) -> Result<Option<ExternalPredictorConfig>, Failure> {
        Ok(match self {
            PredictorChoice::Baseline { .. } => None,
            PredictorChoice::Subprocess {
                program,
                args,
                timeout_secs,
                window,
            } => {
                let timeout = match timeout_secs {
                    Some(s) if !(s.is_finite() && *s > 0.0) => {
                        return Err(Failure::invalid(format!("predictor.timeout_secs must be positive, got {s}")))
                    }
                    Some(s) => Some(Duration::from_secs_f64(*s)),
                    None => None,
                };
                Some(ExternalPredictorConfig::Subprocess(SubprocessConfig {
                    program: program.clone(),
                    args: args.clone(),
                    timeout,
                    window: *window,
                }))
            }
            PredictorChoice::Files {
                requests,
                responses,
                command,
            } => Some(ExternalPredictorConfig::Files(FileExchangeConfig {
                requests: requests.clone(),
                responses: responses.clone(),
                command: command.clone(),
            })),
        })
    }
}

/// Every knob an experiment depends on. Reports embed the resolved value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Face-act corpus (canonical JSONL).
    pub corpus: Option<PathBuf>,
    /// Dialog-act corpus used for multi-task mixing.
    pub da_corpus: Option<PathBuf>,
    /// `"mrda-basic"` or a path to a tagset JSON file.
    pub tagset: Option<String>,
    pub variant: String,
    pub context_size: usize,
    pub seed: u64,
    pub sample_fraction: f64,
    pub predictor: PredictorChoice,
    pub macro_excluded: Vec<String>,
    pub alpha_levels: Vec<f64>,
    pub shift_tags: Vec<String>,
    pub errors_per_fold: usize,
    pub errors_cap: usize,
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: None,
            da_corpus: None,
            tagset: None,
            variant: "FOS".into(),
            context_size: DEFAULT_CONTEXT_SIZE,
            seed: 0,
            sample_fraction: DEFAULT_SAMPLE_FRACTION,
            predictor: PredictorChoice::Baseline { alpha: DEFAULT_ALPHA },
            macro_excluded: vec!["spos-".into()],
            alpha_levels: DEFAULT_ALPHA_LEVELS.to_vec(),
            shift_tags: vec!["Statement".into(), "Question".into()],
            errors_per_fold: 5,
            errors_cap: 25,
            jobs: 1,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::invalid(format!("config {}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if !(self.sample_fraction > 0.0 && self.sample_fraction <= 1.0) {
            return Err(Failure::invalid(format!(
                "config field sample_fraction must be in (0, 1], got {}",
                self.sample_fraction
            )));
        }
        if let Some(bad) = self.alpha_levels.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(Failure::invalid(format!("config field alpha_levels: {bad} is not in (0, 1)")));
        }
        for label in &self.macro_excluded {
            label
                .parse::<faceact_core::FaceActLabel>()
                .map_err(|e| Failure::invalid(format!("config field macro_excluded: {e}")))?;
        }
        if let PredictorChoice::Baseline { alpha } = self.predictor {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Failure::invalid(format!("config field predictor.alpha must be positive, got {alpha}")));
            }
        }
        if self.jobs == 0 {
            return Err(Failure::invalid("config field jobs must be at least 1"));
        }
        self.predictor.external()?;
        Ok(())
    }
}
