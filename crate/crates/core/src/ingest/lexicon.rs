//! The event lexicon: root-form event labels with their participant arity.
//!
//! The source dataset distinguishes 27 events split into binary events
//! (two interacting objects) and singular events (one object). Only a
//! handful are named in print, so the shipped file carries the named ones
//! plus domain-plausible fillers and is meant to be replaced when the
//! upstream vocabulary is available.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::IngestError;

const BUILTIN_LEXICON: &str = include_str!("../../data/lexicon.json");

/// One lexicon row: a root-form label and its participant count (1 or 2).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub label: String,
    pub arity: u8,
}

/// The closed event vocabulary used for normalization and arity checks.
#[derive(Debug, Clone)]
pub struct Lexicon {
    arities: BTreeMap<String, u8>,
}

impl Lexicon {
    /// The lexicon shipped with the crate (27 entries).
    pub fn builtin() -> Lexicon {
        Lexicon::from_str(BUILTIN_LEXICON).expect("builtin lexicon is valid")
    }

    pub fn load(path: &Path) -> Result<Lexicon, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Lexicon::from_str(&text)
    }

    pub fn from_str(text: &str) -> Result<Lexicon, IngestError> {
        let entries: Vec<LexiconEntry> =
            serde_json::from_str(text).map_err(|source| IngestError::Json { record: None, source })?;
        Lexicon::from_entries(entries)
    }

    pub fn from_entries(entries: Vec<LexiconEntry>) -> Result<Lexicon, IngestError> {
        let mut arities = BTreeMap::new();
        for e in entries {
            let label = e.label.trim().to_ascii_lowercase();
            if label.is_empty() || !label.chars().all(|c| c.is_ascii_lowercase()) {
                return Err(IngestError::Lexicon(format!("label `{}` is not a plain token", e.label)));
            }
            if !(1..=2).contains(&e.arity) {
                return Err(IngestError::Lexicon(format!("label `{label}` has arity {}, expected 1 or 2", e.arity)));
            }
            if arities.insert(label.clone(), e.arity).is_some() {
                return Err(IngestError::Lexicon(format!("duplicate label `{label}`")));
            }
        }
        if arities.is_empty() {
            return Err(IngestError::Lexicon("lexicon has no entries".into()));
        }
        Ok(Lexicon { arities })
    }

    pub fn contains(&self, label: &str) -> bool {
        self.arities.contains_key(label)
    }

    /// Participant count for a known label, `None` for unknown labels.
    pub fn arity(&self, label: &str) -> Option<u8> {
        self.arities.get(label).copied()
    }

    pub fn len(&self) -> usize {
        self.arities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arities.is_empty()
    }

    /// Labels in sorted order.
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.arities.keys().map(|s| s.as_str())
    }

    /// Labels with the given arity, in sorted order.
    pub fn labels_with_arity(&self, arity: u8) -> Vec<&str> {
        self.arities
            .iter()
            .filter(|(_, a)| **a == arity)
            .map(|(l, _)| l.as_str())
            .collect()
    }
}
