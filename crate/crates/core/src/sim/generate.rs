use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::spec::{GroundTruth, ScenarioSpec, ScenarioType};
use super::SimError;
use crate::event_log::{LogGrammar, Millis, OperationCatalog, OperationRun, Party, RawLogEntry, ServiceRecordVector};
use crate::features::{Emotion, FrameFeature, Polarity, Speaker, UtteranceFeature};

/// Relative lengths of the built-in nine-step procedure, in seconds of a
/// 480 s service.
const DEFAULT_SHARES: [f64; 9] = [30.0, 45.0, 60.0, 70.0, 65.0, 75.0, 55.0, 40.0, 40.0];

const FACE_DROPOUT: f64 = 0.01;
const LOOK_DOWN_PER_RUN: f64 = 0.2;

/// Who and when, independent of the scenario draw.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionIdentity {
    pub session_id: String,
    pub agent_id: String,
    pub client_id: String,
    pub start_ts: Millis,
}

impl SessionIdentity {
    pub fn new(session_id: &str, agent_id: &str, client_id: &str, start_ts: Millis) -> Self {
        SessionIdentity {
            session_id: session_id.into(),
            agent_id: agent_id.into(),
            client_id: client_id.into(),
            start_ts,
        }
    }

    pub fn agent_cluster(&self) -> String {
        format!("vp-{}", self.agent_id)
    }

    pub fn client_cluster(&self) -> String {
        format!("vp-{}", self.client_id)
    }
}

/// One synthetic service: log lines, feature streams and intended outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedSession {
    pub identity: SessionIdentity,
    pub spec: ScenarioSpec,
    pub log: Vec<RawLogEntry>,
    /// Client frames at `spec.fps` interleaved with agent head-pose frames.
    pub frames: Vec<FrameFeature>,
    /// Diarized speech; speakers are unresolved cluster labels.
    pub utterances: Vec<UtteranceFeature>,
    pub truth: GroundTruth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mood {
    Normal,
    Closing,
    Aggravated,
}

#[derive(Debug, Clone)]
struct RunPlan {
    op: usize,
    duration_s: f64,
    /// Offset into the run where the client's mood turns.
    aggravated_from_s: Option<f64>,
    prolonged: bool,
    repeated: bool,
}

#[derive(Debug, Clone, Copy)]
struct Stretch {
    start: Millis,
    end: Millis,
    mood: Mood,
    /// Agent is distracted: silent and often looking down.
    inattentive: bool,
}

pub(crate) fn mix(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn shares(spec: &ScenarioSpec, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = match &spec.operation_shares {
        Some(s) => s.clone(),
        None if n == DEFAULT_SHARES.len() => DEFAULT_SHARES.to_vec(),
        None => vec![1.0; n],
    };
    let total: f64 = raw.iter().sum();
    raw.iter().map(|s| s / total).collect()
}

fn check_catalog(catalog: &OperationCatalog, grammar: &LogGrammar) -> Result<(), SimError> {
    catalog.validate().map_err(|e| SimError::Catalog(e.to_string()))?;
    let first = catalog.operations.first().map(String::as_str);
    let last = catalog.operations.last().map(String::as_str);
    if catalog.operation_for(&grammar.begin_event) != first {
        return Err(SimError::Catalog(format!(
            "{} must map to the first operation",
            grammar.begin_event
        )));
    }
    if catalog.operation_for(&grammar.end_event) != last {
        return Err(SimError::Catalog(format!(
            "{} must map to the last operation",
            grammar.end_event
        )));
    }
    for (i, op) in catalog.operations.iter().enumerate() {
        if i > 0 && event_pool(catalog, grammar, op).is_empty() {
            return Err(SimError::Catalog(format!("operation {op} has no loggable event type")));
        }
    }
    Ok(())
}

fn event_pool<'a>(catalog: &'a OperationCatalog, grammar: &LogGrammar, op: &str) -> Vec<&'a str> {
    catalog
        .raw_types_for(op)
        .into_iter()
        .filter(|t| *t != grammar.begin_event && *t != grammar.end_event)
        .collect()
}

fn plan_runs(spec: &ScenarioSpec, n: usize, rng: &mut ChaCha8Rng) -> Vec<RunPlan> {
    let shares = shares(spec, n);
    let (lo, hi) = spec.duration_multiplier;
    let multiplier = rng.random_range(lo..=hi);
    let target_s = spec.mean_service_s * multiplier;
    let pace = if spec.kind.is_normal() {
        multiplier
    } else {
        rng.random_range(0.95..=1.05)
    };
    let jitter = Normal::new(0.0, spec.operation_jitter).expect("validated jitter");
    let mut base: Vec<f64> = shares
        .iter()
        .map(|s| s * spec.mean_service_s * pace * (1.0 + jitter.sample(rng)).clamp(0.75, 1.25))
        .collect();
    let plain = |op: usize, duration_s: f64| RunPlan {
        op,
        duration_s,
        aggravated_from_s: None,
        prolonged: false,
        repeated: false,
    };

    match spec.kind {
        ScenarioType::ST | ScenarioType::NM => {
            let scale = target_s / base.iter().sum::<f64>();
            base.iter_mut().for_each(|d| *d *= scale);
            base.iter().enumerate().map(|(op, &d)| plain(op, d)).collect()
        }
        ScenarioType::DA => {
            let (kmin, kmax) = spec.prolonged_operations;
            let k = rng.random_range(kmin..=kmax).clamp(1, n - 2);
            let mut chosen: Vec<usize> = sample(rng, n - 2, k).into_iter().map(|i| i + 1).collect();
            chosen.sort_unstable();
            let extra = (target_s - base.iter().sum::<f64>()).max(0.15 * spec.mean_service_s);
            let weights: Vec<f64> = chosen.iter().map(|_| rng.random_range(0.6..1.4)).collect();
            let wsum: f64 = weights.iter().sum();
            let mut runs: Vec<RunPlan> = base.iter().enumerate().map(|(op, &d)| plain(op, d)).collect();
            for (op, w) in chosen.iter().zip(&weights) {
                let run = &mut runs[*op];
                run.aggravated_from_s = Some(run.duration_s * 0.5);
                run.duration_s += extra * w / wsum;
                run.prolonged = true;
            }
            runs
        }
        ScenarioType::DP => {
            // fault at step i repeats steps j..=i, with j >= 1 and at least two steps
            let eligible: Vec<usize> = (2..=n - 2).collect();
            let mut faults: Vec<(usize, usize)> = Vec::new();
            for &i in &eligible {
                if faults.len() < spec.max_repeats && rng.random_bool(spec.repeat_probability) {
                    faults.push((i, rng.random_range(2..=i.min(3))));
                }
            }
            if faults.is_empty() {
                let i = eligible[rng.random_range(0..eligible.len())];
                faults.push((i, rng.random_range(2..=i.min(3))));
            }
            let mut runs = Vec::new();
            for op in 0..n {
                runs.push(plain(op, base[op]));
                if let Some(&(_, len)) = faults.iter().find(|(i, _)| *i == op) {
                    let fault = runs.len() - 1;
                    runs[fault].aggravated_from_s = Some(base[op] * 0.3);
                    for rop in op + 1 - len..=op {
                        let d = (base[rop] * rng.random_range(0.85..1.15)).max(spec.min_repeat_s);
                        let mut r = plain(rop, d);
                        r.repeated = true;
                        r.aggravated_from_s = Some(0.0);
                        runs.push(r);
                    }
                }
            }
            let used: f64 = runs.iter().map(|r| r.duration_s).sum();
            let wait = (target_s - used).max(0.05 * spec.mean_service_s);
            let fault_runs: Vec<usize> = runs
                .iter()
                .enumerate()
                .filter(|(_, r)| !r.repeated && r.aggravated_from_s.is_some())
                .map(|(i, _)| i)
                .collect();
            let weights: Vec<f64> = fault_runs.iter().map(|_| rng.random_range(0.6..1.4)).collect();
            let wsum: f64 = weights.iter().sum();
            for (i, w) in fault_runs.iter().zip(&weights) {
                runs[*i].duration_s += wait * w / wsum;
            }
            runs
        }
    }
}

fn pick_negative(mood: Mood, rng: &mut ChaCha8Rng) -> Emotion {
    let u: f64 = rng.random();
    if mood == Mood::Aggravated {
        if u < 0.5 {
            Emotion::Anger
        } else if u < 0.85 {
            Emotion::Disgust
        } else {
            Emotion::Sadness
        }
    } else if u < 0.4 {
        Emotion::Sadness
    } else if u < 0.7 {
        Emotion::Fear
    } else {
        Emotion::Disgust
    }
}

fn pick_emotion(spec: &ScenarioSpec, mood: Mood, rng: &mut ChaCha8Rng) -> Emotion {
    let c = &spec.client;
    let (pos, neg) = match mood {
        Mood::Normal => (c.baseline_positive, c.baseline_negative),
        Mood::Closing => (c.closing_positive, c.baseline_negative),
        Mood::Aggravated => (c.baseline_positive * 0.3, c.aggravated_negative),
    };
    let u: f64 = rng.random();
    if u < pos {
        Emotion::Happiness
    } else if u < pos + neg {
        pick_negative(mood, rng)
    } else if u < pos + neg + 0.04 {
        Emotion::Surprise
    } else {
        Emotion::Neutral
    }
}

/// Emotion episodes covering `[start, end)`.
fn episodes(spec: &ScenarioSpec, stretches: &[Stretch], rng: &mut ChaCha8Rng) -> Vec<(Millis, Millis, Emotion)> {
    let mut out = Vec::new();
    for s in stretches {
        let mut t = s.start;
        while t < s.end {
            let len = (rng.random_range(2.0..6.0) * 1000.0) as Millis;
            let e = (t + len).min(s.end);
            out.push((t, e, pick_emotion(spec, s.mood, rng)));
            t = e;
        }
    }
    out
}

fn emotion_at(episodes: &[(Millis, Millis, Emotion)], ts: Millis) -> Emotion {
    let i = episodes.partition_point(|e| e.1 <= ts);
    episodes.get(i).or(episodes.last()).map(|e| e.2).unwrap_or(Emotion::Neutral)
}

fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// Generates one session. Identical `(spec, catalog, identity)` give identical
/// output.
pub fn generate_session(
    spec: &ScenarioSpec,
    catalog: &OperationCatalog,
    grammar: &LogGrammar,
    identity: &SessionIdentity,
) -> Result<GeneratedSession, SimError> {
    spec.validate(catalog).map_err(SimError::InvalidSpec)?;
    check_catalog(catalog, grammar)?;
    let mut rng = ChaCha8Rng::seed_from_u64(mix(spec.seed, spec.kind.code()));
    let n = catalog.operations.len();
    let plans = plan_runs(spec, n, &mut rng);

    let mut bounds = Vec::with_capacity(plans.len() + 1);
    let mut acc = 0.0;
    bounds.push(identity.start_ts);
    for p in &plans {
        acc += p.duration_s;
        bounds.push(identity.start_ts + (acc * 1000.0).round() as Millis);
    }
    let end_ts = *bounds.last().expect("non-empty");

    let mut stretches = Vec::new();
    for (k, p) in plans.iter().enumerate() {
        let (s, e) = (bounds[k], bounds[k + 1]);
        let calm = if p.op + 2 >= n { Mood::Closing } else { Mood::Normal };
        match p.aggravated_from_s {
            Some(off) => {
                let turn = (s + (off * 1000.0) as Millis).min(e);
                if turn > s {
                    stretches.push(Stretch { start: s, end: turn, mood: calm, inattentive: false });
                }
                stretches.push(Stretch {
                    start: turn,
                    end: e,
                    mood: Mood::Aggravated,
                    inattentive: p.prolonged,
                });
            }
            None => stretches.push(Stretch { start: s, end: e, mood: calm, inattentive: false }),
        }
    }

    let log = build_log(&plans, &bounds, catalog, grammar, identity, &mut rng);
    let expected_record = expected_record(&plans, &bounds, &log, catalog);
    let eps = episodes(spec, &stretches, &mut rng);
    let client_frames = client_frames(spec, &plans, &bounds, &eps, &mut rng);
    let agent_frames = agent_frames(spec, &stretches, identity.start_ts, end_ts, &mut rng);
    let utterances = utterances(&plans, &bounds, &stretches, &eps, catalog, identity, &mut rng);

    let mut frames = client_frames;
    frames.extend(agent_frames);
    frames.sort_by_key(|f| (f.ts, f.subject == Party::Agent));

    let truth = GroundTruth {
        session_id: identity.session_id.clone(),
        label: spec.kind,
        repeated_positions: plans.iter().enumerate().filter(|(_, p)| p.repeated).map(|(i, _)| i).collect(),
        prolonged_positions: plans.iter().enumerate().filter(|(_, p)| p.prolonged).map(|(i, _)| i).collect(),
        dominant_polarity: dominant_polarity(&frames),
        expected_temporal_flag: !spec.kind.is_normal(),
        expected_sequential_flag: spec.kind == ScenarioType::DP,
        expected_record,
    };
    truth.validate().map_err(SimError::InvalidSpec)?;

    Ok(GeneratedSession {
        identity: identity.clone(),
        spec: spec.clone(),
        log,
        frames,
        utterances,
        truth,
    })
}

fn build_log(
    plans: &[RunPlan],
    bounds: &[Millis],
    catalog: &OperationCatalog,
    grammar: &LogGrammar,
    identity: &SessionIdentity,
    rng: &mut ChaCha8Rng,
) -> Vec<RawLogEntry> {
    let rid = &identity.session_id;
    let mut log = Vec::new();
    for (k, p) in plans.iter().enumerate() {
        let op = &catalog.operations[p.op];
        let pool = event_pool(catalog, grammar, op);
        let (s, e) = (bounds[k], bounds[k + 1]);
        if k == 0 {
            log.push(
                RawLogEntry::new(s, rid, &grammar.begin_event)
                    .with_param("service", rid)
                    .with_param("agent", &identity.agent_id)
                    .with_param("client", &identity.client_id),
            );
        } else {
            log.push(RawLogEntry::new(s, rid, pool[0]));
        }
        let extra = if p.prolonged {
            rng.random_range(1..=4)
        } else {
            rng.random_range(0..=2)
        };
        if pool.is_empty() || e - s <= 3000 {
            continue;
        }
        let mut times: Vec<Millis> = (0..extra).map(|_| rng.random_range(s + 1000..e - 1000)).collect();
        times.sort_unstable();
        for t in times {
            let raw = pool[rng.random_range(0..pool.len())];
            log.push(RawLogEntry::new(t, rid, raw));
        }
    }
    log.push(RawLogEntry::new(*bounds.last().expect("bounds"), rid, &grammar.end_event));
    log
}

fn expected_record(
    plans: &[RunPlan],
    bounds: &[Millis],
    log: &[RawLogEntry],
    catalog: &OperationCatalog,
) -> ServiceRecordVector {
    let end = *bounds.last().expect("bounds");
    let items = plans
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let (s, e) = (bounds[k], bounds[k + 1]);
            let last = k + 1 == plans.len();
            let count = log
                .iter()
                .filter(|l| l.timestamp >= s && (l.timestamp < e || (last && l.timestamp == end)))
                .count() as u32;
            let operation = catalog.operations[p.op].clone();
            OperationRun {
                turn: catalog.owner(&operation),
                operation,
                count,
                start_ts: s,
                end_ts: e,
            }
        })
        .collect();
    ServiceRecordVector { items }
}

fn client_frames(
    spec: &ScenarioSpec,
    plans: &[RunPlan],
    bounds: &[Millis],
    eps: &[(Millis, Millis, Emotion)],
    rng: &mut ChaCha8Rng,
) -> Vec<FrameFeature> {
    let mut look_down = Vec::new();
    for k in 0..plans.len() {
        let (s, e) = (bounds[k], bounds[k + 1]);
        if e - s > 8000 && rng.random_bool(LOOK_DOWN_PER_RUN) {
            let len = rng.random_range(1000..3000);
            let at = rng.random_range(s + 2000..e - 2000 - len);
            look_down.push((at, at + len));
        }
    }
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let start = bounds[0];
    let end = *bounds.last().expect("bounds");
    let mut frames = Vec::new();
    let mut i: u64 = 0;
    loop {
        let ts = start + (i as f64 * 1000.0 / spec.fps).round() as Millis;
        if ts >= end {
            break;
        }
        let secs = (ts - start) as f64 / 1000.0;
        let down = look_down.iter().any(|&(a, b)| ts >= a && ts < b);
        let yaw = 8.0 * (secs * std::f64::consts::TAU / 7.0).sin() + 1.5 * noise.sample(rng);
        let pitch = if down {
            -48.0 + 3.0 * noise.sample(rng)
        } else {
            -4.0 + 3.0 * (secs * std::f64::consts::TAU / 11.0).sin() + noise.sample(rng)
        };
        let roll = 2.0 * noise.sample(rng);
        let emotion = if rng.random_bool(FACE_DROPOUT) {
            None
        } else {
            Some(emotion_at(eps, ts))
        };
        frames.push(FrameFeature::new(i, ts, emotion).with_pose(round1(yaw), round1(pitch), round1(roll)));
        i += 1;
    }
    frames
}

fn agent_frames(
    spec: &ScenarioSpec,
    stretches: &[Stretch],
    start: Millis,
    end: Millis,
    rng: &mut ChaCha8Rng,
) -> Vec<FrameFeature> {
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let mut frames = Vec::new();
    let mut i: u64 = 0;
    let mut down_until: Millis = start;
    let mut up_until: Millis = start;
    loop {
        let ts = start + (i as f64 * 1000.0 / spec.agent_pose_fps).round() as Millis;
        if ts >= end {
            break;
        }
        let inattentive = stretches
            .iter()
            .any(|s| s.inattentive && ts >= s.start && ts < s.end);
        if inattentive && ts >= down_until && ts >= up_until {
            let len = rng.random_range(5_000..15_000);
            if rng.random_bool(spec.agent_head_down) {
                down_until = ts + len;
            } else {
                up_until = ts + len;
            }
        }
        let pitch = if inattentive && ts < down_until {
            -50.0 + 3.0 * noise.sample(rng)
        } else {
            -6.0 + 3.0 * noise.sample(rng)
        };
        let yaw = 4.0 * noise.sample(rng);
        frames.push(
            FrameFeature::new(i, ts, Some(Emotion::Neutral))
                .with_pose(round1(yaw), round1(pitch), 0.0)
                .with_subject(Party::Agent),
        );
        i += 1;
    }
    frames
}

fn utterances(
    plans: &[RunPlan],
    bounds: &[Millis],
    stretches: &[Stretch],
    eps: &[(Millis, Millis, Emotion)],
    catalog: &OperationCatalog,
    identity: &SessionIdentity,
    rng: &mut ChaCha8Rng,
) -> Vec<UtteranceFeature> {
    let agent = identity.agent_cluster();
    let client = identity.client_cluster();
    let mut out = Vec::new();
    for (k, p) in plans.iter().enumerate() {
        let (s, e) = (bounds[k], bounds[k + 1]);
        let owner = catalog.owner(&catalog.operations[p.op]);
        let mut t = s + rng.random_range(500..2500);
        while t < e - 1300 {
            let stretch = stretches
                .iter()
                .find(|st| t >= st.start && t < st.end)
                .copied();
            let inattentive = stretch.is_some_and(|st| st.inattentive);
            let by_client = if inattentive {
                true
            } else {
                let owner_speaks = rng.random_bool(0.55);
                (owner == Party::Client) == owner_speaks
            };
            let len = rng.random_range(1500..5000);
            let end = (t + len).min(e - 300);
            if end - t < 800 {
                break;
            }
            let mid = (t + end) / 2;
            let u = if by_client {
                let emotion = if rng.random_bool(0.8) {
                    emotion_at(eps, mid)
                } else {
                    Emotion::Neutral
                };
                UtteranceFeature::new(t, end, Speaker::Unknown, emotion).with_cluster(&client)
            } else {
                let closing = stretch.is_some_and(|st| st.mood == Mood::Closing);
                let emotion = if closing && rng.random_bool(0.2) {
                    Emotion::Happiness
                } else {
                    Emotion::Neutral
                };
                UtteranceFeature::new(t, end, Speaker::Unknown, emotion).with_cluster(&agent)
            };
            out.push(u);
            let gap = if inattentive {
                rng.random_range(4000..9000)
            } else {
                rng.random_range(800..4000)
            };
            t = end + gap;
        }
    }
    out
}

fn dominant_polarity(frames: &[FrameFeature]) -> Polarity {
    let client: Vec<_> = frames
        .iter()
        .filter(|f| f.subject == Party::Client && f.face_present)
        .collect();
    if client.is_empty() {
        return Polarity::Absent;
    }
    let pos = client.iter().filter(|f| f.polarity == Polarity::Positive).count();
    let neg = client.iter().filter(|f| f.polarity == Polarity::Negative).count();
    let floor = client.len() / 10;
    if pos > neg && pos > floor {
        Polarity::Positive
    } else if neg > pos && neg > floor {
        Polarity::Negative
    } else {
        Polarity::Neutral
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_log::{aggregate_operations, parse_log_str, segment_services, write_log};

    fn ident() -> SessionIdentity {
        SessionIdentity::new("S1", "a1", "c1", 1_620_000_000_000)
    }

    fn generate(kind: ScenarioType, seed: u64) -> GeneratedSession {
        generate_session(
            &ScenarioSpec::new(kind, seed),
            &OperationCatalog::default(),
            &LogGrammar::default(),
            &ident(),
        )
        .unwrap()
    }

    #[test]
    fn deterministic() {
        assert_eq!(generate(ScenarioType::NM, 1), generate(ScenarioType::NM, 1));
        assert_ne!(generate(ScenarioType::NM, 1).log, generate(ScenarioType::NM, 2).log);
    }

    #[test]
    fn log_round_trips_to_expected_record() {
        let g = LogGrammar::default();
        let catalog = OperationCatalog::default();
        for kind in ScenarioType::ALL {
            for seed in 0..5 {
                let s = generate(kind, seed);
                let mut buf = Vec::new();
                write_log(&s.log, &g, &mut buf).unwrap();
                let parsed = parse_log_str(std::str::from_utf8(&buf).unwrap(), &g).unwrap();
                assert!(parsed.diagnostics.is_empty());
                let seg = segment_services(&parsed.entries, &g);
                assert_eq!(seg.sessions.len(), 1);
                let rec = aggregate_operations(&seg.sessions[0], &catalog).unwrap();
                assert_eq!(rec, s.truth.expected_record, "{kind} seed {seed}");
            }
        }
    }

    #[test]
    fn durations_follow_type() {
        for seed in 0..10 {
            let span = |k| generate(k, seed).truth.expected_record.span_ms() as f64 / 480_000.0;
            let st = span(ScenarioType::ST);
            let nm = span(ScenarioType::NM);
            let da = span(ScenarioType::DA);
            let dp = span(ScenarioType::DP);
            assert!(st < 0.8, "ST {st}");
            assert!((0.9..=1.1).contains(&nm), "NM {nm}");
            assert!(da > 1.3 && da < 1.8, "DA {da}");
            assert!(dp > 1.3 && dp < 1.9, "DP {dp}");
        }
    }

    #[test]
    fn dp_repeats_and_da_prolongs() {
        for seed in 0..10 {
            let dp = generate(ScenarioType::DP, seed);
            assert!(!dp.truth.repeated_positions.is_empty());
            assert_eq!(dp.truth.expected_record.repeated_positions(), dp.truth.repeated_positions);
            let da = generate(ScenarioType::DA, seed);
            assert!(da.truth.expected_record.repeated_positions().is_empty());
            assert!((2..=3).contains(&da.truth.prolonged_positions.len()));
            let nm = generate(ScenarioType::NM, seed);
            assert_eq!(nm.truth.expected_record.len(), 9);
        }
    }

    #[test]
    fn streams_are_valid() {
        for kind in ScenarioType::ALL {
            let s = generate(kind, 3);
            assert!(s.frames.iter().all(|f| f.validate().is_ok()));
            assert!(s.utterances.iter().all(|u| u.validate().is_ok()));
            crate::features::check_speaker_overlap(&s.utterances).unwrap();
            let client = s.frames.iter().filter(|f| f.subject == Party::Client).count();
            let span = s.truth.expected_record.span_ms() as f64 / 1000.0;
            assert!((client as f64 - span * 25.0).abs() <= 1.0);
        }
    }

    #[test]
    fn mood_matches_type() {
        assert_eq!(generate(ScenarioType::ST, 4).truth.dominant_polarity, Polarity::Positive);
        assert_eq!(generate(ScenarioType::DA, 4).truth.dominant_polarity, Polarity::Negative);
    }

    #[test]
    fn rejects_bad_spec() {
        let mut spec = ScenarioSpec::new(ScenarioType::NM, 0);
        spec.duration_multiplier = (0.5, 0.7);
        assert!(matches!(
            generate_session(&spec, &OperationCatalog::default(), &LogGrammar::default(), &ident()),
            Err(SimError::InvalidSpec(_))
        ));
    }
}
