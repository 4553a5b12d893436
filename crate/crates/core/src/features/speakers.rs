use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Speaker, UtteranceFeature};

/// Diarization clusters observed in one session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpeakerEvidence {
    pub session_id: String,
    pub agent_id: String,
    pub clusters: BTreeSet<String>,
}

impl SpeakerEvidence {
    pub fn from_utterances(session_id: &str, agent_id: &str, utterances: &[UtteranceFeature]) -> Self {
        SpeakerEvidence {
            session_id: session_id.to_string(),
            agent_id: agent_id.to_string(),
            clusters: utterances.iter().filter_map(|u| u.cluster.clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpeakerRoles {
    pub roles: BTreeMap<String, Speaker>,
    /// True when the agent could not be identified for this session.
    pub low_confidence: bool,
}

impl SpeakerRoles {
    pub fn role(&self, cluster: &str) -> Speaker {
        self.roles.get(cluster).copied().unwrap_or(Speaker::Unknown)
    }
}

/// Labels the agent's voice in each session.
///
/// Sessions are grouped by agent id. Within a group of at least two sessions
/// the cluster present in a strict majority of sessions (and in at least two)
/// is the agent; the single remaining cluster of a session is the client.
/// Everything else stays unknown and the session is flagged low-confidence.
pub fn register_agent(evidence: &[SpeakerEvidence]) -> BTreeMap<String, SpeakerRoles> {
    let mut groups: BTreeMap<&str, Vec<&SpeakerEvidence>> = BTreeMap::new();
    for ev in evidence {
        groups.entry(ev.agent_id.as_str()).or_default().push(ev);
    }

    let mut out = BTreeMap::new();
    for sessions in groups.values() {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for ev in sessions {
            for c in &ev.clusters {
                *counts.entry(c.as_str()).or_default() += 1;
            }
        }
        let best = counts.values().copied().max().unwrap_or(0);
        let leaders: Vec<&str> = counts
            .iter()
            .filter(|(_, &n)| n == best)
            .map(|(c, _)| *c)
            .collect();
        let agent = (sessions.len() >= 2 && best >= 2 && best * 2 > sessions.len() && leaders.len() == 1)
            .then(|| leaders[0]);

        for ev in sessions {
            let mut roles = SpeakerRoles::default();
            let has_agent = agent.is_some_and(|a| ev.clusters.contains(a));
            let others = ev.clusters.iter().filter(|c| Some(c.as_str()) != agent).count();
            for c in &ev.clusters {
                let role = if !has_agent {
                    Speaker::Unknown
                } else if Some(c.as_str()) == agent {
                    Speaker::Agent
                } else if others == 1 {
                    Speaker::Client
                } else {
                    Speaker::Unknown
                };
                roles.roles.insert(c.clone(), role);
            }
            roles.low_confidence = !has_agent || others > 1;
            out.insert(ev.session_id.clone(), roles);
        }
    }
    out
}

/// Rewrites utterance speakers from their cluster labels.
pub fn resolve_speakers(utterances: &mut [UtteranceFeature], roles: &SpeakerRoles) {
    for u in utterances {
        if let Some(c) = &u.cluster {
            u.speaker = roles.role(c);
        }
    }
}
