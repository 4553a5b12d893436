use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Party, RawLogEntry};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unmapped raw event types: {}", .0.join(", "))]
    Unmapped(Vec<String>),
    #[error("catalog maps {raw:?} to unknown operation {operation:?}")]
    UnknownTarget { raw: String, operation: String },
    #[error("operation {0:?} has no turn owner")]
    MissingTurnOwner(String),
    #[error("catalog has no operations")]
    Empty,
    #[error("duplicate operation {0:?}")]
    Duplicate(String),
    #[error("failed to read catalog: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid catalog document: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Maps raw event types onto canonical operations.
///
/// The default catalog is an invented nine-step workflow; real deployments
/// are expected to supply their own file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperationCatalog {
    pub operations: Vec<String>,
    pub mapping: BTreeMap<String, String>,
    pub turn_owner: BTreeMap<String, Party>,
}

const DEFAULT_STEPS: [(&str, Party, &[&str]); 9] = [
    ("initiate", Party::Agent, &["BEGIN_SERVICE", "OPEN_TICKET", "QUEUE_CALL"]),
    ("identify", Party::Client, &["SCAN_ID", "READ_CARD"]),
    ("verify", Party::Agent, &["VERIFY_FACE", "CHECK_RECORD"]),
    ("upload", Party::Client, &["UPLOAD_DOC", "SCAN_DOC"]),
    ("review", Party::Agent, &["REVIEW_FORM", "EDIT_FIELD"]),
    ("execute", Party::Agent, &["SUBMIT_AMENDMENT", "EXEC_TXN"]),
    ("pay", Party::Client, &["PAY_INIT", "PAY_CONFIRM"]),
    ("confirm", Party::Client, &["SIGN_PAD", "PRINT_RECEIPT"]),
    ("close", Party::Agent, &["CLOSE_TICKET", "END_SERVICE"]),
];

impl Default for OperationCatalog {
    fn default() -> Self {
        let mut mapping = BTreeMap::new();
        let mut turn_owner = BTreeMap::new();
        let mut operations = Vec::new();
        for (op, owner, raws) in DEFAULT_STEPS {
            operations.push(op.to_string());
            turn_owner.insert(op.to_string(), owner);
            for raw in raws {
                mapping.insert(raw.to_string(), op.to_string());
            }
        }
        OperationCatalog {
            operations,
            mapping,
            turn_owner,
        }
    }
}

impl OperationCatalog {
    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        let catalog: OperationCatalog = serde_json::from_str(text)?;
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn load(path: &Path) -> Result<Self, CatalogError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), CatalogError> {
        if self.operations.is_empty() {
            return Err(CatalogError::Empty);
        }
        let mut seen = BTreeSet::new();
        for op in &self.operations {
            if !seen.insert(op.as_str()) {
                return Err(CatalogError::Duplicate(op.clone()));
            }
            if !self.turn_owner.contains_key(op) {
                return Err(CatalogError::MissingTurnOwner(op.clone()));
            }
        }
        for (raw, op) in &self.mapping {
            if !seen.contains(op.as_str()) {
                return Err(CatalogError::UnknownTarget {
                    raw: raw.clone(),
                    operation: op.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn operation_for(&self, raw_event_type: &str) -> Option<&str> {
        self.mapping.get(raw_event_type).map(String::as_str)
    }

    pub fn owner(&self, operation: &str) -> Party {
        self.turn_owner.get(operation).copied().unwrap_or_default()
    }

    pub fn index_of(&self, operation: &str) -> Option<usize> {
        self.operations.iter().position(|o| o == operation)
    }

    /// Raw event types for `operation`, sorted.
    pub fn raw_types_for(&self, operation: &str) -> Vec<&str> {
        self.mapping
            .iter()
            .filter(|(_, op)| op.as_str() == operation)
            .map(|(raw, _)| raw.as_str())
            .collect()
    }

    /// Sorted, de-duplicated raw types with no mapping.
    pub fn unknown_types<'a>(&self, entries: impl IntoIterator<Item = &'a RawLogEntry>) -> Vec<String> {
        entries
            .into_iter()
            .filter(|e| !self.mapping.contains_key(&e.raw_event_type))
            .map(|e| e.raw_event_type.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_catalog_shape() {
        let c = OperationCatalog::default();
        c.validate().unwrap();
        assert_eq!(c.operations.len(), 9);
        assert_eq!(c.operations.first().unwrap(), "initiate");
        assert_eq!(c.operations.last().unwrap(), "close");
        assert_eq!(c.operation_for("END_SERVICE"), Some("close"));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let c = OperationCatalog::default();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(OperationCatalog::from_json(&text).unwrap(), c);

        let mut bad = c.clone();
        bad.mapping.insert("X".into(), "nope".into());
        assert!(matches!(
            bad.validate(),
            Err(CatalogError::UnknownTarget { .. })
        ));
    }

    #[test]
    fn unknown_types_sorted_unique() {
        let c = OperationCatalog::default();
        let entries = vec![
            RawLogEntry::new(1, "R", "ZZZ"),
            RawLogEntry::new(2, "R", "SCAN_ID"),
            RawLogEntry::new(3, "R", "AAA"),
            RawLogEntry::new(4, "R", "ZZZ"),
        ];
        assert_eq!(c.unknown_types(&entries), vec!["AAA", "ZZZ"]);
    }
}
