use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::event_log::{OperationCatalog, ServiceRecordVector};
use crate::features::Polarity;

/// The four scripted satisfaction types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ScenarioType {
    /// Satisfied: quicker than expected, thankful client.
    ST,
    /// Normal: on time, neutral client.
    NM,
    /// Dissatisfied with the agent: inattentive agent prolongs some steps.
    DA,
    /// Dissatisfied with the procedure: a terminal fault forces repeated steps.
    DP,
}

impl ScenarioType {
    pub const ALL: [ScenarioType; 4] = [ScenarioType::ST, ScenarioType::NM, ScenarioType::DA, ScenarioType::DP];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioType::ST => "ST",
            ScenarioType::NM => "NM",
            ScenarioType::DA => "DA",
            ScenarioType::DP => "DP",
        }
    }

    /// Satisfied and normal services make up the normal training set.
    pub fn is_normal(self) -> bool {
        matches!(self, ScenarioType::ST | ScenarioType::NM)
    }

    pub(crate) fn code(self) -> u64 {
        match self {
            ScenarioType::ST => 1,
            ScenarioType::NM => 2,
            ScenarioType::DA => 3,
            ScenarioType::DP => 4,
        }
    }
}

impl fmt::Display for ScenarioType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "ST" => Ok(ScenarioType::ST),
            "NM" => Ok(ScenarioType::NM),
            "DA" => Ok(ScenarioType::DA),
            "DP" => Ok(ScenarioType::DP),
            other => Err(format!("unknown scenario type {other:?} (expected ST, NM, DA or DP)")),
        }
    }
}

/// How the simulated client reacts. Shares are per emotion episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClientProfile {
    pub baseline_positive: f64,
    pub baseline_negative: f64,
    /// Positive share during the last two operations.
    pub closing_positive: f64,
    /// Negative share during prolonged or repeated stretches.
    pub aggravated_negative: f64,
}

/// Generator parameters for one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioType,
    pub seed: u64,
    /// Expected service length in seconds.
    pub mean_service_s: f64,
    /// Client camera frame rate.
    pub fps: f64,
    /// Sampling rate of the agent head-pose stream.
    pub agent_pose_fps: f64,
    /// Total duration as a multiple of `mean_service_s`, drawn uniformly.
    pub duration_multiplier: (f64, f64),
    /// Relative SD of each operation's duration.
    pub operation_jitter: f64,
    /// Per-step chance that a terminal fault forces a sub-sequence to repeat.
    pub repeat_probability: f64,
    pub max_repeats: usize,
    /// Shortest repeated run, in seconds.
    pub min_repeat_s: f64,
    /// How many operations an inattentive agent drags out (inclusive range).
    pub prolonged_operations: (usize, usize),
    /// Share of a prolonged stretch the agent spends looking down.
    pub agent_head_down: f64,
    pub client: ClientProfile,
    /// Relative operation lengths; `None` uses the built-in profile.
    pub operation_shares: Option<Vec<f64>>,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioType, seed: u64) -> Self {
        let (duration_multiplier, repeat_probability, prolonged, head_down, client) = match kind {
            ScenarioType::ST => (
                (0.66, 0.78),
                0.0,
                (0, 0),
                0.0,
                ClientProfile {
                    baseline_positive: 0.30,
                    baseline_negative: 0.02,
                    closing_positive: 0.65,
                    aggravated_negative: 0.0,
                },
            ),
            ScenarioType::NM => (
                (0.94, 1.06),
                0.0,
                (0, 0),
                0.0,
                ClientProfile {
                    baseline_positive: 0.05,
                    baseline_negative: 0.05,
                    closing_positive: 0.08,
                    aggravated_negative: 0.0,
                },
            ),
            ScenarioType::DA => (
                (1.35, 1.75),
                0.0,
                (2, 3),
                0.6,
                ClientProfile {
                    baseline_positive: 0.03,
                    baseline_negative: 0.08,
                    closing_positive: 0.03,
                    aggravated_negative: 0.55,
                },
            ),
            ScenarioType::DP => (
                (1.5, 1.8),
                0.15,
                (0, 0),
                0.0,
                ClientProfile {
                    baseline_positive: 0.03,
                    baseline_negative: 0.08,
                    closing_positive: 0.03,
                    aggravated_negative: 0.7,
                },
            ),
        };
        ScenarioSpec {
            kind,
            seed,
            mean_service_s: 480.0,
            fps: 25.0,
            agent_pose_fps: 1.0,
            duration_multiplier,
            operation_jitter: 0.06,
            repeat_probability,
            max_repeats: 1,
            min_repeat_s: 36.0,
            prolonged_operations: prolonged,
            agent_head_down: head_down,
            client,
            operation_shares: None,
        }
    }

    pub fn validate(&self, catalog: &OperationCatalog) -> Result<(), String> {
        let (lo, hi) = self.duration_multiplier;
        if !(lo > 0.0 && lo <= hi) {
            return Err(format!("invalid duration multiplier range ({lo}, {hi})"));
        }
        match self.kind {
            ScenarioType::ST if hi >= 1.0 => return Err("ST must finish faster than expected".into()),
            ScenarioType::NM if lo < 0.9 || hi > 1.1 => {
                return Err("NM duration must stay within 0.9-1.1 of the expected time".into())
            }
            ScenarioType::DA | ScenarioType::DP if lo <= 1.0 => {
                return Err(format!("{} must take longer than expected", self.kind))
            }
            _ => {}
        }
        match self.kind {
            ScenarioType::DP if !(self.repeat_probability > 0.0 && self.max_repeats > 0) => {
                return Err("DP needs a positive repeat probability".into())
            }
            ScenarioType::ST | ScenarioType::NM if self.repeat_probability != 0.0 => {
                return Err(format!("{} must not repeat operations", self.kind))
            }
            _ => {}
        }
        if self.kind == ScenarioType::DA && self.prolonged_operations.0 == 0 {
            return Err("DA must prolong at least one operation".into());
        }
        if !(self.mean_service_s > 0.0 && self.fps > 0.0 && self.agent_pose_fps > 0.0) {
            return Err("durations and frame rates must be positive".into());
        }
        let n = catalog.operations.len();
        if n < 2 {
            return Err("catalog needs at least two operations".into());
        }
        if self.kind == ScenarioType::DP && n < 4 {
            return Err("DP needs at least four operations to repeat a middle sub-sequence".into());
        }
        if self.kind == ScenarioType::DA && self.prolonged_operations.1 > n.saturating_sub(2) {
            return Err("more prolonged operations than middle steps".into());
        }
        if let Some(shares) = &self.operation_shares {
            if shares.len() != n || shares.iter().any(|s| !(*s > 0.0)) {
                return Err("operation_shares must give one positive share per operation".into());
            }
        }
        for p in [
            self.client.baseline_positive,
            self.client.baseline_negative,
            self.client.closing_positive,
            self.client.aggravated_negative,
            self.agent_head_down,
            self.repeat_probability,
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("probability {p} outside [0, 1]"));
            }
        }
        Ok(())
    }
}

/// What the generator intended, for checking the pipeline against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub session_id: String,
    pub label: ScenarioType,
    pub expected_record: ServiceRecordVector,
    /// Runs whose operation already ran earlier, non-adjacently.
    pub repeated_positions: Vec<usize>,
    /// Runs dragged out by an inattentive agent.
    pub prolonged_positions: Vec<usize>,
    pub dominant_polarity: Polarity,
    pub expected_temporal_flag: bool,
    pub expected_sequential_flag: bool,
}

impl GroundTruth {
    pub fn validate(&self) -> Result<(), String> {
        match self.label {
            ScenarioType::DP if self.repeated_positions.is_empty() => {
                Err("DP truth without a repeated operation".into())
            }
            ScenarioType::DA | ScenarioType::DP if !self.expected_temporal_flag => {
                Err(format!("{} truth must expect a temporal anomaly", self.label))
            }
            ScenarioType::ST | ScenarioType::NM
                if self.expected_temporal_flag || self.expected_sequential_flag =>
            {
                Err(format!("{} truth must not expect anomalies", self.label))
            }
            _ => Ok(()),
        }
    }
}
