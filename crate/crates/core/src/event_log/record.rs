use serde::{Deserialize, Serialize};

use super::{CatalogError, Millis, OperationCatalog, Party, ServiceSession};

/// One run of consecutive log entries mapping to the same operation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperationRun {
    pub operation: String,
    pub count: u32,
    pub start_ts: Millis,
    /// Start of the next run, or the session end for the last run.
    pub end_ts: Millis,
    pub turn: Party,
}

impl OperationRun {
    pub fn duration_ms(&self) -> Millis {
        self.end_ts - self.start_ts
    }

    pub fn duration_s(&self) -> f64 {
        self.duration_ms() as f64 / 1000.0
    }

    pub fn contains(&self, ts: Millis) -> bool {
        ts >= self.start_ts && ts < self.end_ts
    }
}

/// Run-length encoded operation sequence `[(e1, n1), (e2, n2), ...]` with timing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceRecordVector {
    pub items: Vec<OperationRun>,
}

impl ServiceRecordVector {
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn start_ts(&self) -> Option<Millis> {
        self.items.first().map(|r| r.start_ts)
    }

    pub fn end_ts(&self) -> Option<Millis> {
        self.items.last().map(|r| r.end_ts)
    }

    pub fn span_ms(&self) -> Millis {
        match (self.start_ts(), self.end_ts()) {
            (Some(s), Some(e)) => e - s,
            _ => 0,
        }
    }

    /// Operation names, one per run.
    pub fn operations(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|r| r.operation.as_str())
    }

    /// Expands runs back into one operation per log entry.
    pub fn expand(&self) -> Vec<&str> {
        self.items
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.operation.as_str(), r.count as usize))
            .collect()
    }

    /// Index of the run active at `ts`.
    pub fn run_at(&self, ts: Millis) -> Option<usize> {
        let idx = self.items.partition_point(|r| r.start_ts <= ts);
        if idx == 0 {
            return None;
        }
        let run = &self.items[idx - 1];
        run.contains(ts).then_some(idx - 1)
    }

    /// Positions of runs whose operation already appeared earlier in a
    /// non-adjacent run.
    pub fn repeated_positions(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, run) in self.items.iter().enumerate() {
            if self.items[..i].iter().any(|r| r.operation == run.operation) {
                out.push(i);
            }
        }
        out
    }
}

/// Collapses a session's entries into operation runs.
///
/// Each run starts at its first entry and ends where the next run starts; the
/// last run ends at the session end. A `turn=agent|client` parameter on any
/// entry of the run overrides the catalog's turn owner (first one wins).
pub fn aggregate_operations(
    session: &ServiceSession,
    catalog: &OperationCatalog,
) -> Result<ServiceRecordVector, CatalogError> {
    let unknown = catalog.unknown_types(&session.entries);
    if !unknown.is_empty() {
        return Err(CatalogError::Unmapped(unknown));
    }

    let mut items: Vec<OperationRun> = Vec::new();
    let mut overridden = false;
    for entry in &session.entries {
        let op = catalog
            .operation_for(&entry.raw_event_type)
            .expect("checked above");
        let turn_param = entry.param("turn").and_then(Party::parse);
        match items.last_mut() {
            Some(run) if run.operation == op => {
                run.count += 1;
                if let (false, Some(t)) = (overridden, turn_param) {
                    run.turn = t;
                    overridden = true;
                }
            }
            _ => {
                if let Some(prev) = items.last_mut() {
                    prev.end_ts = entry.timestamp;
                }
                overridden = turn_param.is_some();
                items.push(OperationRun {
                    operation: op.to_string(),
                    count: 1,
                    start_ts: entry.timestamp,
                    end_ts: entry.timestamp,
                    turn: turn_param.unwrap_or_else(|| catalog.owner(op)),
                });
            }
        }
    }
    if let Some(last) = items.last_mut() {
        last.end_ts = session.end_ts.max(last.start_ts);
    }
    Ok(ServiceRecordVector { items })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_log::RawLogEntry;

    fn session(types: &[&str]) -> ServiceSession {
        let entries: Vec<_> = types
            .iter()
            .enumerate()
            .map(|(i, t)| RawLogEntry::new(1000 * i as Millis, "R", t))
            .collect();
        ServiceSession {
            service_id: "S".into(),
            request_id: "R".into(),
            agent_id: "a".into(),
            client_id: "c".into(),
            begin_ts: 0,
            end_ts: 1000 * types.len() as Millis,
            entries,
            video_uri: None,
        }
    }

    #[test]
    fn consecutive_runs_merge() {
        let c = OperationCatalog::default();
        let rec =
            aggregate_operations(&session(&["VERIFY_FACE", "CHECK_RECORD", "PAY_INIT"]), &c).unwrap();
        let pairs: Vec<_> = rec.items.iter().map(|r| (r.operation.as_str(), r.count)).collect();
        assert_eq!(pairs, vec![("verify", 2), ("pay", 1)]);
        assert_eq!(rec.items[0].end_ts, 2000);
        assert_eq!(rec.items[1].end_ts, 3000);
    }

    #[test]
    fn non_adjacent_repeats_stay_separate() {
        let c = OperationCatalog::default();
        let rec =
            aggregate_operations(&session(&["UPLOAD_DOC", "VERIFY_FACE", "SCAN_DOC"]), &c).unwrap();
        assert_eq!(rec.len(), 3);
        assert_eq!(rec.repeated_positions(), vec![2]);
        assert_eq!(rec.expand(), vec!["upload", "verify", "upload"]);
    }

    #[test]
    fn unmapped_types_listed() {
        let c = OperationCatalog::default();
        let err = aggregate_operations(&session(&["NOPE", "PAY_INIT", "ALSO_NOPE"]), &c).unwrap_err();
        match err {
            CatalogError::Unmapped(types) => assert_eq!(types, vec!["ALSO_NOPE", "NOPE"]),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn turn_override() {
        let c = OperationCatalog::default();
        let mut s = session(&["VERIFY_FACE", "PAY_INIT"]);
        s.entries[0].params.push(("turn".into(), "client".into()));
        let rec = aggregate_operations(&s, &c).unwrap();
        assert_eq!(rec.items[0].turn, Party::Client);
        assert_eq!(rec.items[1].turn, Party::Client);
        assert_eq!(c.owner("verify"), Party::Agent);
    }

    #[test]
    fn run_lookup() {
        let c = OperationCatalog::default();
        let rec = aggregate_operations(&session(&["VERIFY_FACE", "PAY_INIT"]), &c).unwrap();
        assert_eq!(rec.run_at(0), Some(0));
        assert_eq!(rec.run_at(999), Some(0));
        assert_eq!(rec.run_at(1000), Some(1));
        assert_eq!(rec.run_at(2000), None);
        assert_eq!(rec.run_at(-1), None);
    }
}
