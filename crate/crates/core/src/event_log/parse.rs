use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Millis;

/// One parsed machine-log line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawLogEntry {
    pub timestamp: Millis,
    pub request_id: String,
    pub raw_event_type: String,
    pub params: Vec<(String, String)>,
}

impl RawLogEntry {
    pub fn new(timestamp: Millis, request_id: &str, raw_event_type: &str) -> Self {
        RawLogEntry {
            timestamp,
            request_id: request_id.to_string(),
            raw_event_type: raw_event_type.to_string(),
            params: Vec::new(),
        }
    }

    pub fn with_param(mut self, key: &str, value: &str) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    /// First value for `key`, if present.
    pub fn param(&self, key: &str) -> Option<&str> {
        self.params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Renders the entry as a single log line (no trailing newline).
    pub fn to_line(&self, grammar: &LogGrammar) -> String {
        let sep = grammar.field_separator;
        let mut line = format!(
            "{}{sep}{}{sep}{}",
            self.timestamp, self.request_id, self.raw_event_type
        );
        for (k, v) in &self.params {
            line.push(sep);
            line.push_str(k);
            line.push(grammar.kv_separator);
            line.push_str(v);
        }
        line
    }
}

/// Line grammar for machine logs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogGrammar {
    pub field_separator: char,
    pub kv_separator: char,
    /// Event type that opens a service.
    pub begin_event: String,
    /// Event type that closes a service.
    pub end_event: String,
}

impl Default for LogGrammar {
    fn default() -> Self {
        LogGrammar {
            field_separator: ' ',
            kv_separator: '=',
            begin_event: "BEGIN_SERVICE".to_string(),
            end_event: "END_SERVICE".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogDiagnosticKind {
    Malformed,
    /// Timestamp earlier than the previous well-formed line. The entry is kept.
    OutOfOrder,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogDiagnostic {
    /// 1-based line number.
    pub line: usize,
    pub kind: LogDiagnosticKind,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParsedLog {
    pub entries: Vec<RawLogEntry>,
    pub diagnostics: Vec<LogDiagnostic>,
}

impl ParsedLog {
    pub fn malformed_count(&self) -> usize {
        self.diagnostics
            .iter()
            .filter(|d| d.kind == LogDiagnosticKind::Malformed)
            .count()
    }
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("failed to read log: {0}")]
    Io(#[from] io::Error),
    #[error("log does not match grammar: {malformed} of {total} lines malformed, first at line {first_line}: {content:?}")]
    FormatMismatch {
        first_line: usize,
        content: String,
        malformed: usize,
        total: usize,
    },
}

fn parse_line(line: &str, grammar: &LogGrammar) -> Result<RawLogEntry, String> {
    let mut fields = line.split(grammar.field_separator);
    let ts = fields.next().unwrap_or_default();
    if ts.is_empty() || !ts.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("invalid timestamp {ts:?}"));
    }
    let timestamp: Millis = ts
        .parse()
        .map_err(|_| format!("timestamp out of range {ts:?}"))?;
    let request_id = match fields.next() {
        Some(r) if !r.is_empty() => r,
        _ => return Err("missing request id".to_string()),
    };
    let raw_event_type = match fields.next() {
        Some(e) if !e.is_empty() => e,
        _ => return Err("missing event type".to_string()),
    };
    let mut params = Vec::new();
    for field in fields {
        match field.split_once(grammar.kv_separator) {
            Some((k, v)) if !k.is_empty() => params.push((k.to_string(), v.to_string())),
            _ => return Err(format!("invalid parameter {field:?}")),
        }
    }
    Ok(RawLogEntry {
        timestamp,
        request_id: request_id.to_string(),
        raw_event_type: raw_event_type.to_string(),
        params,
    })
}

/// Parses a line-delimited log. Blank lines are skipped.
///
/// Malformed lines become diagnostics; if more than half of the non-blank
/// lines are malformed the whole source is rejected.
pub fn parse_log<R: BufRead>(source: R, grammar: &LogGrammar) -> Result<ParsedLog, LogError> {
    let mut parsed = ParsedLog::default();
    let mut total = 0usize;
    let mut first_bad: Option<(usize, String)> = None;
    let mut last_ts: Option<Millis> = None;

    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        total += 1;
        match parse_line(&line, grammar) {
            Ok(entry) => {
                if let Some(prev) = last_ts {
                    if entry.timestamp < prev {
                        parsed.diagnostics.push(LogDiagnostic {
                            line: lineno,
                            kind: LogDiagnosticKind::OutOfOrder,
                            message: format!(
                                "timestamp {} precedes previous {}",
                                entry.timestamp, prev
                            ),
                        });
                    }
                }
                last_ts = Some(last_ts.map_or(entry.timestamp, |p| p.max(entry.timestamp)));
                parsed.entries.push(entry);
            }
            Err(message) => {
                if first_bad.is_none() {
                    first_bad = Some((lineno, line.clone()));
                }
                parsed.diagnostics.push(LogDiagnostic {
                    line: lineno,
                    kind: LogDiagnosticKind::Malformed,
                    message,
                });
            }
        }
    }

    let malformed = parsed.malformed_count();
    if malformed * 2 > total {
        let (first_line, content) = first_bad.unwrap_or_default();
        return Err(LogError::FormatMismatch {
            first_line,
            content,
            malformed,
            total,
        });
    }
    Ok(parsed)
}

pub fn parse_log_str(source: &str, grammar: &LogGrammar) -> Result<ParsedLog, LogError> {
    parse_log(source.as_bytes(), grammar)
}

/// Writes entries one per line, each terminated by `\n`.
pub fn write_log<W: Write>(
    entries: &[RawLogEntry],
    grammar: &LogGrammar,
    mut out: W,
) -> io::Result<()> {
    for entry in entries {
        out.write_all(entry.to_line(grammar).as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
