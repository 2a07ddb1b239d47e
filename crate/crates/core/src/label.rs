//! Face-act labels and speaker roles.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// The closed face-act inventory: eight face acts plus `Other`.
///
/// Naming follows `{hearer|speaker}{negative|positive}{raise|threaten}`; the
/// canonical string form is the lowercase short name with a sign suffix,
/// e.g. `"hneg-"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FaceActLabel {
    HNegMinus,
    HNegPlus,
    HPosMinus,
    HPosPlus,
    SNegMinus,
    SNegPlus,
    SPosMinus,
    SPosPlus,
    Other,
}

impl FaceActLabel {
    pub const ALL: [FaceActLabel; 9] = [
        FaceActLabel::HNegMinus,
        FaceActLabel::HNegPlus,
        FaceActLabel::HPosMinus,
        FaceActLabel::HPosPlus,
        FaceActLabel::SNegMinus,
        FaceActLabel::SNegPlus,
        FaceActLabel::SPosMinus,
        FaceActLabel::SPosPlus,
        FaceActLabel::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FaceActLabel::HNegMinus => "hneg-",
            FaceActLabel::HNegPlus => "hneg+",
            FaceActLabel::HPosMinus => "hpos-",
            FaceActLabel::HPosPlus => "hpos+",
            FaceActLabel::SNegMinus => "sneg-",
            FaceActLabel::SNegPlus => "sneg+",
            FaceActLabel::SPosMinus => "spos-",
            FaceActLabel::SPosPlus => "spos+",
            FaceActLabel::Other => "other",
        }
    }

    /// Position in [`FaceActLabel::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    /// Canonical strings of all nine labels, in enum order.
    pub fn label_strings() -> Vec<String> {
        Self::ALL.iter().map(|l| l.as_str().to_string()).collect()
    }
}

impl fmt::Display for FaceActLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FaceActLabel {
    type Err = Error;

    /// Strict parse of the canonical form. Generated model output goes
    /// through [`crate::predictor::repair_label`] instead.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FaceActLabel::ALL
            .iter()
            .copied()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::UnknownLabel(s.to_string()))
    }
}

impl Serialize for FaceActLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for FaceActLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Persuader (`ER`) or persuadee (`EE`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpeakerRole {
    Persuader,
    Persuadee,
}

impl SpeakerRole {
    pub fn as_str(self) -> &'static str {
        match self {
            SpeakerRole::Persuader => "ER",
            SpeakerRole::Persuadee => "EE",
        }
    }
}

impl fmt::Display for SpeakerRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpeakerRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ER" => Ok(SpeakerRole::Persuader),
            "EE" => Ok(SpeakerRole::Persuadee),
            other => Err(Error::UnknownSpeaker(other.to_string())),
        }
    }
}
