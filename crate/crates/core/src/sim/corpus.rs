use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{generate_session, mix, GeneratedSession, SessionIdentity};
use super::spec::{GroundTruth, ScenarioSpec, ScenarioType};
use super::SimError;
use crate::event_log::{write_log, LogGrammar, Millis, OperationCatalog};
use crate::features::{write_frames, write_utterances};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CATALOG_FILE: &str = "catalog.json";
pub const MANIFEST_VERSION: u32 = 1;

/// How many sessions of each type to generate, and where they sit in time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub counts: Vec<(ScenarioType, usize)>,
    pub base_seed: u64,
    pub agents: usize,
    pub start_ts: Millis,
    /// Gap between consecutive session starts.
    pub spacing_ms: Millis,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            counts: ScenarioType::ALL.iter().map(|&k| (k, 10)).collect(),
            base_seed: 7,
            agents: 4,
            start_ts: 1_620_000_000_000,
            spacing_ms: 3_600_000,
        }
    }
}

impl CorpusConfig {
    pub fn with_counts(counts: &[(ScenarioType, usize)], base_seed: u64) -> Self {
        CorpusConfig {
            counts: counts.to_vec(),
            base_seed,
            ..CorpusConfig::default()
        }
    }

    /// Parses `ST=10,NM=10,DA=10,DP=10`.
    pub fn parse_counts(text: &str) -> Result<Vec<(ScenarioType, usize)>, String> {
        text.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|pair| {
                let (k, v) = pair
                    .split_once('=')
                    .ok_or_else(|| format!("expected TYPE=COUNT, got {pair:?}"))?;
                let kind: ScenarioType = k.trim().parse()?;
                let count = v
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| format!("bad count for {kind}: {e}"))?;
                Ok((kind, count))
            })
            .collect()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().map(|(_, c)| c).sum()
    }

    fn slots(&self) -> Vec<(ScenarioType, usize, usize)> {
        let mut out = Vec::with_capacity(self.total());
        for &(kind, count) in &self.counts {
            for i in 0..count {
                out.push((kind, i, out.len()));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub session_id: String,
    pub label: ScenarioType,
    pub agent_id: String,
    pub client_id: String,
    pub seed: u64,
    pub start_ts: Millis,
    pub log: String,
    pub frames: String,
    pub utterances: String,
    pub truth: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub base_seed: u64,
    pub sessions: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self, SimError> {
        let file = File::open(dir.join(MANIFEST_FILE))?;
        let manifest: Manifest = serde_json::from_reader(BufReader::new(file))?;
        if manifest.version != MANIFEST_VERSION {
            return Err(SimError::InvalidSpec(format!(
                "manifest version {} is not supported",
                manifest.version
            )));
        }
        Ok(manifest)
    }
}

/// Generates every session of the corpus with specs from [`ScenarioSpec::new`].
pub fn generate_corpus(
    config: &CorpusConfig,
    catalog: &OperationCatalog,
    grammar: &LogGrammar,
) -> Result<Vec<GeneratedSession>, SimError> {
    generate_corpus_with(config, catalog, grammar, ScenarioSpec::new)
}

/// Like [`generate_corpus`] but with a custom spec per `(type, seed)`.
pub fn generate_corpus_with<F>(
    config: &CorpusConfig,
    catalog: &OperationCatalog,
    grammar: &LogGrammar,
    make_spec: F,
) -> Result<Vec<GeneratedSession>, SimError>
where
    F: Fn(ScenarioType, u64) -> ScenarioSpec + Sync,
{
    if config.agents == 0 {
        return Err(SimError::InvalidSpec("at least one agent is required".into()));
    }
    config
        .slots()
        .into_par_iter()
        .map(|(kind, i, global)| {
            let seed = mix(config.base_seed, (kind.code() << 32) | i as u64);
            let identity = SessionIdentity::new(
                &format!("{kind}-{:03}", i + 1),
                &format!("a{}", global % config.agents + 1),
                &format!("c{:03}", global + 1),
                config.start_ts + global as Millis * config.spacing_ms,
            );
            generate_session(&make_spec(kind, seed), catalog, grammar, &identity)
        })
        .collect()
}

/// Writes the corpus, its catalog and a manifest into `dir`.
pub fn write_corpus(
    dir: &Path,
    sessions: &[GeneratedSession],
    config: &CorpusConfig,
    catalog: &OperationCatalog,
    grammar: &LogGrammar,
) -> Result<Manifest, SimError> {
    fs::create_dir_all(dir)?;
    let entries = sessions
        .par_iter()
        .map(|s| write_session(dir, s, grammar))
        .collect::<Result<Vec<_>, SimError>>()?;
    let manifest = Manifest {
        version: MANIFEST_VERSION,
        base_seed: config.base_seed,
        sessions: entries,
    };
    write_json(&dir.join(CATALOG_FILE), catalog)?;
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), SimError> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn write_session(dir: &Path, s: &GeneratedSession, grammar: &LogGrammar) -> Result<ManifestEntry, SimError> {
    let id = &s.identity.session_id;
    let entry = ManifestEntry {
        session_id: id.clone(),
        label: s.spec.kind,
        agent_id: s.identity.agent_id.clone(),
        client_id: s.identity.client_id.clone(),
        seed: s.spec.seed,
        start_ts: s.identity.start_ts,
        log: format!("{id}.log"),
        frames: format!("{id}.frames"),
        utterances: format!("{id}.utterances"),
        truth: format!("{id}.truth"),
    };
    let mut out = BufWriter::new(File::create(dir.join(&entry.log))?);
    write_log(&s.log, grammar, &mut out)?;
    out.flush()?;
    let mut out = BufWriter::new(File::create(dir.join(&entry.frames))?);
    write_frames(&s.frames, &mut out)?;
    out.flush()?;
    let mut out = BufWriter::new(File::create(dir.join(&entry.utterances))?);
    write_utterances(&s.utterances, &mut out)?;
    out.flush()?;
    write_json(&dir.join(&entry.truth), &s.truth)?;
    Ok(entry)
}

pub fn read_truth(dir: &Path, entry: &ManifestEntry) -> Result<GroundTruth, SimError> {
    let file = File::open(dir.join(&entry.truth))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_counts_accepts_and_rejects() {
        let c = CorpusConfig::parse_counts("ST=2, nm=3").unwrap();
        assert_eq!(c, vec![(ScenarioType::ST, 2), (ScenarioType::NM, 3)]);
        assert!(CorpusConfig::parse_counts("XX=1").is_err());
        assert!(CorpusConfig::parse_counts("ST").is_err());
        assert!(CorpusConfig::parse_counts("ST=-1").is_err());
    }

    #[test]
    fn ids_and_agents() {
        let cfg = CorpusConfig::with_counts(&[(ScenarioType::ST, 2), (ScenarioType::DP, 3)], 1);
        let sessions = generate_corpus(&cfg, &OperationCatalog::default(), &LogGrammar::default()).unwrap();
        let ids: Vec<_> = sessions.iter().map(|s| s.identity.session_id.as_str()).collect();
        assert_eq!(ids, ["ST-001", "ST-002", "DP-001", "DP-002", "DP-003"]);
        assert_eq!(sessions[4].identity.agent_id, "a1");
        assert_eq!(sessions[1].identity.start_ts - sessions[0].identity.start_ts, 3_600_000);
    }
}
