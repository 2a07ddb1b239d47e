//! Dialog-act tagsets, loaded from JSON registry files.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier of the built-in MRDA "basic" tagset.
pub const MRDA_BASIC: &str = "mrda-basic";

/// A dialog-act tag together with the tagset it was drawn from.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DialogActTag {
    pub name: String,
    pub tagset_id: String,
}

/// An ordered set of dialog-act tag names with an optional collapse map
/// (e.g. `Disruption -> Statement`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagSet {
    pub id: String,
    pub tags: Vec<String>,
    #[serde(default)]
    pub collapse_map: BTreeMap<String, String>,
}

impl TagSet {
    pub fn new(
        id: impl Into<String>,
        tags: Vec<String>,
        collapse_map: BTreeMap<String, String>,
    ) -> Result<Self> {
        let tagset = TagSet {
            id: id.into(),
            tags,
            collapse_map,
        };
        tagset.validate()?;
        Ok(tagset)
    }

    /// The MRDA basic-level tags observed in the face-act correlation
    /// analysis, with a reserved `Unlabeled` slot. Disruption collapses
    /// into Statement.
    pub fn mrda_basic() -> Self {
        let tags = [
            "BackChannel",
            "Disruption",
            "FloorGrabber",
            "Question",
            "Statement",
            "Unlabeled",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let collapse_map = BTreeMap::from([("Disruption".to_string(), "Statement".to_string())]);
        TagSet::new(MRDA_BASIC, tags, collapse_map).expect("built-in tagset is valid")
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |message: String| Error::InvalidTagSet {
            id: self.id.clone(),
            message,
        };
        if self.tags.is_empty() {
            return Err(invalid("no tags".into()));
        }
        let mut seen = HashSet::new();
        for tag in &self.tags {
            if tag.is_empty() {
                return Err(invalid("empty tag name".into()));
            }
            if !seen.insert(tag.as_str()) {
                return Err(invalid(format!("duplicate tag {tag:?}")));
            }
        }
        for (from, to) in &self.collapse_map {
            if !seen.contains(from.as_str()) {
                return Err(invalid(format!("collapse source {from:?} is not a tag")));
            }
            if !seen.contains(to.as_str()) {
                return Err(invalid(format!("collapse target {to:?} is not a tag")));
            }
        }
        Ok(())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.tags.iter().any(|t| t == name)
    }

    pub fn tag(&self, name: &str) -> Result<DialogActTag> {
        if self.contains(name) {
            Ok(DialogActTag {
                name: name.to_string(),
                tagset_id: self.id.clone(),
            })
        } else {
            Err(Error::UnknownDialogAct {
                tag: name.to_string(),
                tagset: self.id.clone(),
            })
        }
    }

    /// Applies the collapse map; tags without an entry map to themselves.
    pub fn collapse<'a>(&'a self, name: &'a str) -> &'a str {
        self.collapse_map.get(name).map(String::as_str).unwrap_or(name)
    }

    /// Tags that remain after collapsing, in tagset order.
    pub fn collapsed_tags(&self) -> Vec<&str> {
        self.tags
            .iter()
            .filter(|t| !self.collapse_map.contains_key(t.as_str()))
            .map(String::as_str)
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let tagset: TagSet = serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("tagset JSON: {e}")))?;
        tagset.validate()?;
        Ok(tagset)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mrda_default() {
        let mrda = TagSet::mrda_basic();
        assert_eq!(mrda.tags.len(), 6);
        assert_eq!(mrda.collapse("Disruption"), "Statement");
        assert_eq!(mrda.collapse("Question"), "Question");
        assert!(!mrda.collapsed_tags().contains(&"Disruption"));
        assert_eq!(mrda.tag("Question").unwrap().tagset_id, MRDA_BASIC);
        assert!(mrda.tag("Yes-No-Question").is_err());
    }

    #[test]
    fn rejects_duplicates_and_dangling_collapse() {
        let dup = TagSet::new("x", vec!["A".into(), "A".into()], BTreeMap::new());
        assert!(dup.is_err());
        let dangling = TagSet::new(
            "x",
            vec!["A".into()],
            BTreeMap::from([("A".to_string(), "B".to_string())]),
        );
        assert!(dangling.is_err());
    }

    #[test]
    fn parses_registry_json() {
        let text = r#"{"id": "swda", "tags": ["Statement-non-opinion", "Hedge", "Yes-No-Question"]}"#;
        let tagset = TagSet::from_json(text).unwrap();
        assert_eq!(tagset.tags.len(), 3);
        assert!(tagset.collapse_map.is_empty());
        assert!(TagSet::from_json(r#"{"id": "e", "tags": []}"#).is_err());
    }
}
