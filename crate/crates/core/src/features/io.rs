//! Newline-delimited JSON feature files.
//!
//! The first line is a header naming the schema and version; every following
//! non-blank line is one record.

use std::io::{self, BufRead, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{check_speaker_overlap, FrameFeature, UtteranceFeature};
use crate::event_log::{Millis, Party};

pub const FRAME_SCHEMA: &str = "anchorscope.frames";
pub const UTTERANCE_SCHEMA: &str = "anchorscope.utterances";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FeatureIoError {
    #[error("failed to read features: {0}")]
    Io(#[from] io::Error),
    #[error("missing schema header")]
    MissingHeader,
    #[error("expected schema {expected} v{SCHEMA_VERSION}, found {found} v{version}")]
    Schema {
        expected: &'static str,
        found: String,
        version: u32,
    },
    #[error("line {line}: {message}")]
    Record { line: usize, message: String },
}

#[derive(Serialize, Deserialize)]
struct Header {
    schema: String,
    version: u32,
}

fn read_records<T, R>(
    source: R,
    schema: &'static str,
    validate: impl Fn(&T) -> Result<(), String>,
) -> Result<Vec<T>, FeatureIoError>
where
    T: DeserializeOwned,
    R: BufRead,
{
    let mut lines = source.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, line)) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
            None => return Err(FeatureIoError::MissingHeader),
        }
    };
    let header: Header = serde_json::from_str(&header).map_err(|_| FeatureIoError::MissingHeader)?;
    if header.schema != schema || header.version != SCHEMA_VERSION {
        return Err(FeatureIoError::Schema {
            expected: schema,
            found: header.schema,
            version: header.version,
        });
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: T = serde_json::from_str(&line).map_err(|e| FeatureIoError::Record {
            line: idx + 1,
            message: e.to_string(),
        })?;
        validate(&record).map_err(|message| FeatureIoError::Record {
            line: idx + 1,
            message,
        })?;
        out.push(record);
    }
    Ok(out)
}

fn write_records<T: Serialize, W: Write>(records: &[T], schema: &str, mut out: W) -> io::Result<()> {
    let header = Header {
        schema: schema.to_string(),
        version: SCHEMA_VERSION,
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_frames<R: BufRead>(source: R) -> Result<Vec<FrameFeature>, FeatureIoError> {
    read_records(source, FRAME_SCHEMA, FrameFeature::validate)
}

pub fn read_utterances<R: BufRead>(source: R) -> Result<Vec<UtteranceFeature>, FeatureIoError> {
    let utterances = read_records(source, UTTERANCE_SCHEMA, UtteranceFeature::validate)?;
    check_speaker_overlap(&utterances).map_err(|message| FeatureIoError::Record { line: 0, message })?;
    Ok(utterances)
}

pub fn write_frames<W: Write>(frames: &[FrameFeature], out: W) -> io::Result<()> {
    write_records(frames, FRAME_SCHEMA, out)
}

pub fn write_utterances<W: Write>(utterances: &[UtteranceFeature], out: W) -> io::Result<()> {
    write_records(utterances, UTTERANCE_SCHEMA, out)
}

/// What an ingested pair of feature files covers.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub frames: usize,
    pub client_frames: usize,
    pub face_present_fraction: f64,
    pub utterances: usize,
    pub speech_ms: Millis,
    pub first_ts: Option<Millis>,
    pub last_ts: Option<Millis>,
}

impl CoverageSummary {
    pub fn compute(frames: &[FrameFeature], utterances: &[UtteranceFeature]) -> Self {
        let client: Vec<_> = frames.iter().filter(|f| f.subject == Party::Client).collect();
        let present = client.iter().filter(|f| f.face_present).count();
        let first = frames
            .iter()
            .map(|f| f.ts)
            .chain(utterances.iter().map(|u| u.start_ts))
            .min();
        let last = frames
            .iter()
            .map(|f| f.ts)
            .chain(utterances.iter().map(|u| u.end_ts))
            .max();
        CoverageSummary {
            frames: frames.len(),
            client_frames: client.len(),
            face_present_fraction: if client.is_empty() {
                0.0
            } else {
                present as f64 / client.len() as f64
            },
            utterances: utterances.len(),
            speech_ms: utterances.iter().map(|u| u.duration_ms()).sum(),
            first_ts: first,
            last_ts: last,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{Emotion, Speaker};

    #[test]
    fn frames_round_trip() {
        let frames = vec![
            FrameFeature::new(0, 10, Some(Emotion::Happiness)).with_pose(1.5, -2.0, 0.25),
            FrameFeature::new(1, 50, None),
        ];
        let mut buf = Vec::new();
        write_frames(&frames, &mut buf).unwrap();
        assert_eq!(read_frames(buf.as_slice()).unwrap(), frames);
    }

    #[test]
    fn wrong_schema_rejected() {
        let mut buf = Vec::new();
        write_utterances(&[], &mut buf).unwrap();
        assert!(matches!(
            read_frames(buf.as_slice()),
            Err(FeatureIoError::Schema { .. })
        ));
        assert!(matches!(read_frames(&b""[..]), Err(FeatureIoError::MissingHeader)));
    }

    #[test]
    fn invalid_record_reports_line() {
        let text = format!(
            "{{\"schema\":\"{UTTERANCE_SCHEMA}\",\"version\":1}}\n{}\n",
            r#"{"start_ts":5,"end_ts":5,"speaker":"client","emotion":"anger","polarity":"negative"}"#
        );
        match read_utterances(text.as_bytes()) {
            Err(FeatureIoError::Record { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn coverage_summary() {
        let frames = vec![
            FrameFeature::new(0, 0, Some(Emotion::Neutral)),
            FrameFeature::new(1, 40, None),
        ];
        let us = vec![UtteranceFeature::new(10, 1010, Speaker::Client, Emotion::Neutral)];
        let c = CoverageSummary::compute(&frames, &us);
        assert_eq!(c.face_present_fraction, 0.5);
        assert_eq!(c.speech_ms, 1000);
        assert_eq!((c.first_ts, c.last_ts), (Some(0), Some(1010)));
    }
}
