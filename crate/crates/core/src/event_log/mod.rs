//! Machine-log ingestion.
//!
//! Raw terminal logs are parsed into [`RawLogEntry`] tuples, grouped into
//! [`ServiceSession`]s by matching begin/end messages that share a request id,
//! and finally collapsed into a run-length [`ServiceRecordVector`] of canonical
//! operations using an [`OperationCatalog`].
//!
//! The default line grammar is
//!
//! ```text
//! <epoch_ms> <request_id> <EVENT_TYPE> key=value key=value ...
//! ```

mod catalog;
mod parse;
mod record;
mod session;

pub use catalog::{CatalogError, OperationCatalog};
pub use parse::{
    parse_log, parse_log_str, write_log, LogDiagnostic, LogDiagnosticKind, LogError, LogGrammar,
    ParsedLog, RawLogEntry,
};
pub use record::{aggregate_operations, OperationRun, ServiceRecordVector};
pub use session::{segment_services, OpenSession, SegmentDiagnostic, Segmentation, ServiceSession};

use serde::{Deserialize, Serialize};

/// UTC milliseconds since the Unix epoch.
pub type Millis = i64;

/// Which party owns the interaction during an operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Agent,
    #[default]
    Client,
}

impl Party {
    pub fn as_str(self) -> &'static str {
        match self {
            Party::Agent => "agent",
            Party::Client => "client",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "agent" => Some(Party::Agent),
            "client" => Some(Party::Client),
            _ => None,
        }
    }
}
