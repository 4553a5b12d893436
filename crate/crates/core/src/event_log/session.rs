use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{LogGrammar, Millis, RawLogEntry};

/// One complete service bounded by matched begin/end messages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceSession {
    pub service_id: String,
    pub request_id: String,
    pub agent_id: String,
    pub client_id: String,
    pub begin_ts: Millis,
    pub end_ts: Millis,
    pub entries: Vec<RawLogEntry>,
    pub video_uri: Option<String>,
}

impl ServiceSession {
    pub fn duration_ms(&self) -> Millis {
        self.end_ts - self.begin_ts
    }
}

/// A begin message that never saw its end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenSession {
    pub request_id: String,
    pub begin_ts: Millis,
    pub entries: Vec<RawLogEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SegmentDiagnostic {
    /// End message without a matching begin.
    OrphanEnd { entry: RawLogEntry },
    /// Entry whose request id has no open session.
    Stray { entry: RawLogEntry },
    /// A second begin for a request id that is still open; the first is reported open.
    RestartedBegin { request_id: String, first_begin_ts: Millis },
    /// Begin and end share a timestamp, so the service has no duration.
    EmptySpan { request_id: String, ts: Millis },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Segmentation {
    pub sessions: Vec<ServiceSession>,
    pub open_sessions: Vec<OpenSession>,
    pub diagnostics: Vec<SegmentDiagnostic>,
}

struct Pending {
    order: usize,
    begin: RawLogEntry,
    entries: Vec<RawLogEntry>,
}

fn close(pending: Pending, end: RawLogEntry) -> ServiceSession {
    let begin = &pending.begin;
    let request_id = begin.request_id.clone();
    let service_id = begin
        .param("service")
        .map(str::to_string)
        .unwrap_or_else(|| request_id.clone());
    let agent_id = begin.param("agent").unwrap_or("").to_string();
    let client_id = begin.param("client").unwrap_or("").to_string();
    let video_uri = begin.param("video").map(str::to_string);
    let begin_ts = begin.timestamp;
    let end_ts = end.timestamp;
    let mut entries = pending.entries;
    entries.push(end);
    ServiceSession {
        service_id,
        request_id,
        agent_id,
        client_id,
        begin_ts,
        end_ts,
        entries,
        video_uri,
    }
}

/// Groups entries into sessions keyed by request id.
///
/// Sessions are returned in the order their begin messages appear; entries
/// keep their input order. Service metadata comes from the begin message's
/// `service`, `agent`, `client` and `video` parameters.
pub fn segment_services(entries: &[RawLogEntry], grammar: &LogGrammar) -> Segmentation {
    let mut out = Segmentation::default();
    let mut open: HashMap<&str, Pending> = HashMap::new();
    let mut closed: Vec<(usize, ServiceSession)> = Vec::new();
    let mut abandoned: Vec<(usize, OpenSession)> = Vec::new();
    let mut next_order = 0usize;

    for entry in entries {
        let rid = entry.request_id.as_str();
        if entry.raw_event_type == grammar.begin_event {
            let pending = Pending {
                order: next_order,
                begin: entry.clone(),
                entries: vec![entry.clone()],
            };
            next_order += 1;
            if let Some(prev) = open.insert(rid, pending) {
                out.diagnostics.push(SegmentDiagnostic::RestartedBegin {
                    request_id: rid.to_string(),
                    first_begin_ts: prev.begin.timestamp,
                });
                abandoned.push((
                    prev.order,
                    OpenSession {
                        request_id: rid.to_string(),
                        begin_ts: prev.begin.timestamp,
                        entries: prev.entries,
                    },
                ));
            }
        } else if entry.raw_event_type == grammar.end_event {
            match open.remove(rid) {
                Some(pending) if entry.timestamp > pending.begin.timestamp => {
                    let order = pending.order;
                    closed.push((order, close(pending, entry.clone())));
                }
                Some(pending) => {
                    out.diagnostics.push(SegmentDiagnostic::EmptySpan {
                        request_id: rid.to_string(),
                        ts: entry.timestamp,
                    });
                    let mut entries = pending.entries;
                    entries.push(entry.clone());
                    abandoned.push((
                        pending.order,
                        OpenSession {
                            request_id: rid.to_string(),
                            begin_ts: pending.begin.timestamp,
                            entries,
                        },
                    ));
                }
                None => out.diagnostics.push(SegmentDiagnostic::OrphanEnd {
                    entry: entry.clone(),
                }),
            }
        } else if let Some(pending) = open.get_mut(rid) {
            pending.entries.push(entry.clone());
        } else {
            out.diagnostics.push(SegmentDiagnostic::Stray {
                entry: entry.clone(),
            });
        }
    }

    for (rid, pending) in open {
        abandoned.push((
            pending.order,
            OpenSession {
                request_id: rid.to_string(),
                begin_ts: pending.begin.timestamp,
                entries: pending.entries,
            },
        ));
    }
    closed.sort_by_key(|(order, _)| *order);
    abandoned.sort_by_key(|(order, _)| *order);
    out.sessions = closed.into_iter().map(|(_, s)| s).collect();
    out.open_sessions = abandoned.into_iter().map(|(_, s)| s).collect();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(ts: Millis, rid: &str, ty: &str) -> RawLogEntry {
        RawLogEntry::new(ts, rid, ty)
    }

    #[test]
    fn minimal_pair() {
        let g = LogGrammar::default();
        let entries = vec![
            e(1, "REQ1", "BEGIN_SERVICE").with_param("agent", "a1"),
            e(2, "REQ1", "X"),
            e(3, "REQ1", "END_SERVICE"),
        ];
        let seg = segment_services(&entries, &g);
        assert_eq!(seg.sessions.len(), 1);
        let s = &seg.sessions[0];
        assert_eq!(s.entries.len(), 3);
        assert_eq!((s.begin_ts, s.end_ts), (1, 3));
        assert_eq!(s.agent_id, "a1");
        assert_eq!(s.service_id, "REQ1");
        assert!(seg.diagnostics.is_empty());
    }

    #[test]
    fn orphan_end_alone() {
        let seg = segment_services(&[e(5, "R9", "END_SERVICE")], &LogGrammar::default());
        assert!(seg.sessions.is_empty());
        assert_eq!(seg.diagnostics.len(), 1);
        assert!(matches!(seg.diagnostics[0], SegmentDiagnostic::OrphanEnd { .. }));
    }

    #[test]
    fn unterminated_begin_is_open() {
        let entries = vec![e(1, "R1", "BEGIN_SERVICE"), e(2, "R1", "X")];
        let seg = segment_services(&entries, &LogGrammar::default());
        assert!(seg.sessions.is_empty());
        assert_eq!(seg.open_sessions.len(), 1);
        assert_eq!(seg.open_sessions[0].entries.len(), 2);
    }

    #[test]
    fn stray_and_zero_length() {
        let entries = vec![
            e(1, "R2", "X"),
            e(2, "R1", "BEGIN_SERVICE"),
            e(2, "R1", "END_SERVICE"),
        ];
        let seg = segment_services(&entries, &LogGrammar::default());
        assert!(seg.sessions.is_empty());
        assert_eq!(seg.diagnostics.len(), 2);
        assert_eq!(seg.open_sessions.len(), 1);
    }

    #[test]
    fn restarted_begin_reports_first_as_open() {
        let entries = vec![
            e(1, "R1", "BEGIN_SERVICE"),
            e(2, "R1", "BEGIN_SERVICE"),
            e(3, "R1", "END_SERVICE"),
        ];
        let seg = segment_services(&entries, &LogGrammar::default());
        assert_eq!(seg.sessions.len(), 1);
        assert_eq!(seg.sessions[0].begin_ts, 2);
        assert_eq!(seg.open_sessions.len(), 1);
    }
}
