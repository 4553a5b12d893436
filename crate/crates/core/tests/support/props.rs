//! Invariant checks shared by the property tests and the acceptance gate.
//! Each runs a deterministic proptest runner for the requested case count.

use std::collections::BTreeSet;

use anchorscope::anomaly::{fit_normal_space, fit_transition_model, ComponentSelection};
use anchorscope::event_log::{
    aggregate_operations, parse_log_str, segment_services, write_log, Millis, OperationCatalog, RawLogEntry,
    ServiceSession,
};
use anchorscope::features::{
    aggregate_polarity, align_features, fuse_activation, triangular_smooth, write_frames, write_utterances, Emotion,
    FrameFeature, Polarity, Speaker, UtteranceFeature,
};
use anchorscope::satisfaction::{visual_raw_sum, MagnitudeWeights, SatisfactionConfig, ScoringContext, ServiceChannels};
use anchorscope::sim::{generate_session, GeneratedSession, ScenarioSpec, ScenarioType, SessionIdentity};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use super::{grammar, lookup_product, record, relative_error, MarkovOracle, T0};

pub type Check = fn(u32) -> Result<(), String>;

pub const ALL: &[(&str, Check)] = &[
    ("log round trip", log_round_trip),
    ("segmentation partition", segmentation_partition),
    ("run-length reconstruction", run_length_reconstruction),
    ("polarity kernel", polarity_kernel),
    ("triangular smoothing", triangular_smoothing),
    ("alignment conservation", alignment_conservation),
    ("fusion monotonicity", fusion_monotonicity),
    ("transition oracle equivalence", transition_oracle_equivalence),
    ("appending lowers probability", appending_lowers_probability),
    ("permutation sensitivity", permutation_sensitivity),
    ("pca pythagoras and full rank", pca_pythagoras_and_full_rank),
    ("threshold semantics", threshold_semantics),
    ("weight linearity", weight_linearity),
    ("duration negation consistency", duration_negation_consistency),
    ("emotion monotonicity", emotion_monotonicity),
    ("corpus standardization", corpus_standardization),
    ("anchor affine invariance", anchor_affine_invariance),
    ("simulator determinism", simulator_determinism),
    ("label consistency", label_consistency),
    ("guideline conformance", guideline_conformance),
];

fn run<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let config = Config {
        cases,
        failure_persistence: None,
        max_global_rejects: cases * 20,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn kind() -> impl Strategy<Value = ScenarioType> {
    prop::sample::select(ScenarioType::ALL.to_vec())
}

fn simulate(kind: ScenarioType, seed: u64) -> GeneratedSession {
    let identity = SessionIdentity::new(&format!("{kind}-001"), "a1", "c001", T0);
    generate_session(
        &ScenarioSpec::new(kind, seed),
        &OperationCatalog::default(),
        &grammar(),
        &identity,
    )
    .unwrap()
}

fn emotion() -> impl Strategy<Value = Emotion> {
    prop::sample::select(Emotion::ALL.to_vec())
}

pub fn log_round_trip(cases: u32) -> Result<(), String> {
    run(cases, (kind(), any::<u64>()), |(kind, seed)| {
        let s = simulate(kind, seed);
        let mut text = Vec::new();
        write_log(&s.log, &grammar(), &mut text).unwrap();
        let text = String::from_utf8(text).unwrap();
        let parsed = parse_log_str(&text, &grammar()).unwrap();
        prop_assert!(parsed.diagnostics.is_empty());
        prop_assert_eq!(&parsed.entries, &s.log);
        let mut again = Vec::new();
        write_log(&parsed.entries, &grammar(), &mut again).unwrap();
        prop_assert_eq!(again, text.into_bytes());
        Ok(())
    })
}

pub fn segmentation_partition(cases: u32) -> Result<(), String> {
    let g = grammar();
    let strategy = prop::collection::vec((0..5usize, 0..3u8), 0..80);
    run(cases, strategy, |events| {
        let entries: Vec<RawLogEntry> = events
            .iter()
            .enumerate()
            .map(|(i, &(rid, kind))| {
                let t = match kind {
                    0 => g.begin_event.as_str(),
                    1 => "QUEUE_CALL",
                    _ => g.end_event.as_str(),
                };
                RawLogEntry::new(T0 + 10 * i as Millis, &format!("R{rid}"), t)
            })
            .collect();
        let seg = segment_services(&entries, &g);
        let mut seen: Vec<Millis> = Vec::new();
        for s in &seg.sessions {
            prop_assert!(s.entries.iter().all(|e| e.request_id == s.request_id));
            prop_assert!(s.entries.windows(2).all(|w| w[0].timestamp < w[1].timestamp));
            prop_assert_eq!(&s.entries[0].raw_event_type, &g.begin_event);
            prop_assert_eq!(&s.entries.last().unwrap().raw_event_type, &g.end_event);
            seen.extend(s.entries.iter().map(|e| e.timestamp));
        }
        for o in &seg.open_sessions {
            prop_assert!(o.entries.iter().all(|e| e.request_id == o.request_id));
            seen.extend(o.entries.iter().map(|e| e.timestamp));
        }
        let dropped = seg.diagnostics.iter().filter_map(|d| {
            let v = serde_json::to_value(d).unwrap();
            v.get("entry").and_then(|e| e.get("timestamp")).and_then(|t| t.as_i64())
        });
        seen.extend(dropped);
        seen.sort_unstable();
        let all: Vec<Millis> = entries.iter().map(|e| e.timestamp).collect();
        prop_assert_eq!(seen, all, "every entry lands in exactly one place");
        let begins: Vec<Millis> = seg.sessions.iter().map(|s| s.begin_ts).collect();
        prop_assert!(begins.windows(2).all(|w| w[0] < w[1]), "sessions keep begin order");
        Ok(())
    })
}

pub fn run_length_reconstruction(cases: u32) -> Result<(), String> {
    let catalog = OperationCatalog::default();
    let raw: Vec<String> = catalog.mapping.keys().cloned().collect();
    let strategy = prop::collection::vec((prop::sample::select(raw), 1..5000i64), 1..60);
    run(cases, strategy, |events| {
        let mut t = T0;
        let entries: Vec<RawLogEntry> = events
            .iter()
            .map(|(ty, gap)| {
                t += gap;
                RawLogEntry::new(t, "R", ty)
            })
            .collect();
        let session = ServiceSession {
            service_id: "S".into(),
            request_id: "R".into(),
            agent_id: "a".into(),
            client_id: "c".into(),
            begin_ts: entries[0].timestamp,
            end_ts: t + 1000,
            entries: entries.clone(),
            video_uri: None,
        };
        let rec = aggregate_operations(&session, &catalog).unwrap();
        let mapped: Vec<&str> = entries.iter().map(|e| catalog.operation_for(&e.raw_event_type).unwrap()).collect();
        prop_assert_eq!(rec.expand(), mapped);
        prop_assert!(rec.items.windows(2).all(|w| w[0].operation != w[1].operation));
        prop_assert!(rec.items.iter().all(|r| r.count >= 1));
        let total: Millis = rec.items.iter().map(|r| r.end_ts - r.start_ts).sum();
        prop_assert!(total <= session.end_ts - session.begin_ts);
        Ok(())
    })
}

pub fn polarity_kernel(cases: u32) -> Result<(), String> {
    let kernel = [Emotion::Anger, Emotion::Disgust, Emotion::Fear, Emotion::Sadness];
    run(cases, emotion(), |e| {
        let p = aggregate_polarity(e);
        prop_assert_eq!(p, aggregate_polarity(e));
        prop_assert_eq!(p == Polarity::Negative, kernel.contains(&e));
        prop_assert!(p != Polarity::Absent);
        Ok(())
    })
}

pub fn triangular_smoothing(cases: u32) -> Result<(), String> {
    let strategy = (1..60usize).prop_flat_map(|n| {
        (
            prop::collection::vec(-100.0..100.0f64, n),
            prop::collection::vec(-100.0..100.0f64, n),
            -3.0..3.0f64,
            -3.0..3.0f64,
            0..12i64,
            -50.0..50.0f64,
        )
    });
    run(cases, strategy, |(x, y, a, b, h, c)| {
        let sx = triangular_smooth(&x, h).unwrap();
        let sy = triangular_smooth(&y, h).unwrap();
        let combo: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let sc = triangular_smooth(&combo, h).unwrap();
        prop_assert_eq!(sx.len(), x.len());
        for i in 0..x.len() {
            prop_assert!((sc[i] - (a * sx[i] + b * sy[i])).abs() < 1e-9);
        }
        let (lo, hi) = x.iter().fold((f64::MAX, f64::MIN), |(l, u), v| (l.min(*v), u.max(*v)));
        prop_assert!(sx.iter().all(|v| *v >= lo - 1e-12 && *v <= hi + 1e-12));
        let constant = triangular_smooth(&vec![c; x.len()], h).unwrap();
        prop_assert!(constant.iter().all(|v| (v - c).abs() < 1e-12));
        prop_assert_eq!(triangular_smooth(&x, 0).unwrap(), x.clone());
        Ok(())
    })
}

pub fn alignment_conservation(cases: u32) -> Result<(), String> {
    let ops = OperationCatalog::default().operations;
    let strategy = prop::collection::vec(1.0..90.0f64, 1..9).prop_flat_map(|durations| {
        let span: f64 = durations.iter().sum();
        let span_ms = (span * 1000.0) as i64;
        (
            Just(durations),
            prop::collection::vec(0..span_ms, 0..200),
            prop::collection::vec((0..span_ms, 1..20_000i64, emotion()), 1..30),
        )
    });
    run(cases, strategy, |(durations, frame_offsets, utter)| {
        let runs: Vec<(&str, f64)> = durations.iter().enumerate().map(|(i, d)| (ops[i].as_str(), *d)).collect();
        let rec = record(&runs);
        let end = rec.end_ts().unwrap();
        let frames: Vec<FrameFeature> = frame_offsets
            .iter()
            .enumerate()
            .map(|(i, off)| FrameFeature::new(i as u64, T0 + off, Some(Emotion::Neutral)))
            .collect();
        let mut cursor = T0;
        let mut utterances = Vec::new();
        let mut sorted = utter.clone();
        sorted.sort_by_key(|u| u.0);
        for (off, len, e) in sorted {
            let start = (T0 + off).max(cursor);
            let stop = (start + len).min(end);
            if start < stop {
                utterances.push(UtteranceFeature::new(start, stop, Speaker::Client, e));
                cursor = stop;
            }
        }
        prop_assume!(!utterances.is_empty());
        let a = align_features(&frames, &utterances, &rec).unwrap();
        let placed: usize = a.operations.iter().map(|o| o.frames.len()).sum();
        prop_assert_eq!(placed, frames.len());
        prop_assert_eq!(a.dropped_frames, 0);
        let mut indices: Vec<u64> = a.operations.iter().flat_map(|o| o.frames.iter().map(|f| f.frame_index)).collect();
        indices.sort_unstable();
        prop_assert_eq!(indices, (0..frames.len() as u64).collect::<Vec<_>>());
        for o in &a.operations {
            prop_assert!(o.frames.iter().all(|f| f.ts >= o.start_ts && f.ts < o.end_ts));
            prop_assert!(o.utterances.iter().all(|u| u.start_ts >= o.start_ts && u.end_ts <= o.end_ts));
            prop_assert!((0.0..=1.0).contains(&o.face_coverage) && (0.0..=1.0).contains(&o.speech_coverage));
        }
        let before: Millis = utterances.iter().map(|u| u.end_ts - u.start_ts).sum();
        let pieces: Vec<&UtteranceFeature> = a.operations.iter().flat_map(|o| &o.utterances).collect();
        let after: Millis = pieces.iter().map(|u| u.end_ts - u.start_ts).sum();
        prop_assert!((before - after).abs() <= pieces.len() as Millis);
        Ok(())
    })
}

fn lattice(p: Polarity) -> u8 {
    match p {
        Polarity::Negative => 0,
        Polarity::Neutral | Polarity::Absent => 1,
        Polarity::Positive => 2,
    }
}

pub fn fusion_monotonicity(cases: u32) -> Result<(), String> {
    let pol = || prop::sample::select(vec![Polarity::Negative, Polarity::Neutral, Polarity::Positive, Polarity::Absent]);
    let audio = move || prop::option::of(pol());
    run(cases, (pol(), audio(), pol(), audio()), |(v1, a1, v2, a2)| {
        let rank_a = |a: Option<Polarity>| a.map_or(1, lattice);
        let f1 = fuse_activation(v1, a1);
        let f2 = fuse_activation(v2, a2);
        if lattice(v1) <= lattice(v2) && rank_a(a1) <= rank_a(a2) {
            prop_assert!(f1 <= f2, "{v1:?}/{a1:?} -> {f1}, {v2:?}/{a2:?} -> {f2}");
        }
        let negative = v1 == Polarity::Negative || a1 == Some(Polarity::Negative);
        prop_assert_eq!(negative, f1 == -1);
        Ok(())
    })
}

fn markov_case() -> impl Strategy<Value = (Vec<String>, Vec<Vec<String>>, Vec<String>, Option<f64>)> {
    (2..7usize).prop_flat_map(|m| {
        let states: Vec<String> = (0..m).map(|i| format!("s{i}")).collect();
        let pick = prop::sample::select(states.clone());
        (
            Just(states),
            prop::collection::vec(prop::collection::vec(pick.clone(), 2..33), 1..12),
            prop::collection::vec(pick, 2..41),
            prop::option::of(1e-6..(0.9 / m as f64)),
        )
    })
}

pub fn transition_oracle_equivalence(cases: u32) -> Result<(), String> {
    run(cases, markov_case(), |(states, training, probe, epsilon)| {
        let model = fit_transition_model(&training, &states, epsilon, 32).unwrap();
        prop_assert!(model.row_sum_error() <= 1e-9);
        prop_assert!(model.probs.iter().flatten().all(|p| *p >= model.epsilon - 1e-15));
        prop_assert!(model.service_threshold > 0.0 && model.service_threshold <= 1.0);
        let oracle = MarkovOracle::fit(&training, &states, model.epsilon);
        let score = model.score_sequence(&probe);
        let expected = oracle.probability(&probe, model.epsilon);
        prop_assert!(relative_error(score.log_prob.exp(), expected) <= 1e-12);
        prop_assert!(relative_error(lookup_product(&model, &probe), expected) <= 1e-12);
        prop_assert_eq!(score.transitions.len(), probe.len() - 1);
        Ok(())
    })
}

pub fn appending_lowers_probability(cases: u32) -> Result<(), String> {
    run(cases, (markov_case(), 0..7usize), |((states, training, probe, epsilon), extra)| {
        let model = fit_transition_model(&training, &states, epsilon, 32).unwrap();
        let mut longer = probe.clone();
        longer.push(states[extra % states.len()].clone());
        prop_assert!(model.log_prob(&longer) <= model.log_prob(&probe));
        Ok(())
    })
}

pub fn permutation_sensitivity(cases: u32) -> Result<(), String> {
    let strategy = (3..9usize).prop_flat_map(|k| {
        let chain: Vec<String> = (0..k).map(|i| format!("op{i}")).collect();
        (Just(chain.clone()), Just(chain).prop_shuffle())
    });
    run(cases, strategy, |(chain, permuted)| {
        prop_assume!(permuted != chain);
        let model = fit_transition_model(std::slice::from_ref(&chain), &chain, None, 32).unwrap();
        prop_assert!(model.log_prob(&permuted) < model.log_prob(&chain));
        Ok(())
    })
}

fn pca_case() -> impl Strategy<Value = (usize, Vec<Vec<f64>>, Vec<Vec<f64>>, f64)> {
    (2..9usize).prop_flat_map(|d| {
        let row = prop::collection::vec(-50.0..50.0f64, d);
        (
            Just(d),
            prop::collection::vec(row.clone(), (d + 2)..40),
            prop::collection::vec(row, 1..20),
            0.5..1.0f64,
        )
    })
}

pub fn pca_pythagoras_and_full_rank(cases: u32) -> Result<(), String> {
    run(cases, pca_case(), |(d, train, probes, fraction)| {
        let order: Vec<String> = (0..d).map(|i| format!("f{i}")).collect();
        let space = fit_normal_space(&train, &order, ComponentSelection::VarianceFraction(fraction), 0.95).unwrap();
        prop_assert!(space.orthonormality_error() <= 1e-9);
        prop_assert!(space.k <= d && space.q_threshold >= 0.0);
        for v in train.iter().chain(&probes) {
            let z = space.standardize(v).unwrap();
            let norm: f64 = z.iter().map(|x| x * x).sum();
            let (proj, resid) = space.decompose(&z);
            prop_assert!((norm - proj - resid).abs() <= 1e-9 * norm.max(1.0));
            prop_assert!((resid - space.temporal_anomaly(v).unwrap().score).abs() <= 1e-12);
        }
        let full = fit_normal_space(&train, &order, ComponentSelection::Fixed(d), 0.95).unwrap();
        for v in train.iter().chain(&probes) {
            let s = full.temporal_anomaly(v).unwrap();
            prop_assert!(s.score <= 1e-9, "full-rank residual {}", s.score);
            prop_assert!(!s.flag);
        }
        Ok(())
    })
}

pub fn threshold_semantics(cases: u32) -> Result<(), String> {
    run(cases, (pca_case(), markov_case(), 0.6..0.99f64), |((d, train, _, fraction), (states, seqs, _, eps), alpha)| {
        let order: Vec<String> = (0..d).map(|i| format!("f{i}")).collect();
        let space = fit_normal_space(&train, &order, ComponentSelection::VarianceFraction(fraction), alpha).unwrap();
        let flagged = train.iter().filter(|v| space.temporal_anomaly(v).unwrap().flag).count();
        let n = train.len() as f64;
        prop_assert!(flagged as f64 / n <= (1.0 - alpha) + 1.0 / n + 1e-12);

        let model = fit_transition_model(&seqs, &states, eps, 32).unwrap();
        let flagged = seqs.iter().filter(|s| model.score_sequence(s).flag).count();
        let n = seqs.len() as f64;
        prop_assert!(flagged as f64 / n <= 0.05 + 1.0 / n + 1e-12);
        Ok(())
    })
}

/// Services with each catalog operation at most once, random durations and
/// channel sums.
fn channel_corpus(min: usize) -> impl Strategy<Value = Vec<ServiceChannels>> {
    let ops = OperationCatalog::default().operations;
    let service = (3..10usize).prop_flat_map(move |k| {
        (
            Just(ops.clone()),
            prop::collection::vec(5.0..200.0f64, k),
            prop::collection::vec(-30.0..30.0f64, k),
            prop::collection::vec(-30.0..30.0f64, k),
        )
    });
    prop::collection::vec(service, min..12).prop_map(|services| {
        services
            .into_iter()
            .enumerate()
            .map(|(i, (ops, durations, v, a))| {
                let runs: Vec<(&str, f64)> = durations.iter().enumerate().map(|(j, d)| (ops[j].as_str(), *d)).collect();
                ServiceChannels {
                    session_id: format!("S{i:03}"),
                    record: record(&runs),
                    op_visual: v,
                    op_audio: a,
                    frame_count: 0,
                    utterance_count: 0,
                }
            })
            .collect()
    })
}

fn scores(corpus: &[ServiceChannels], config: &SatisfactionConfig) -> Vec<f64> {
    let ctx = ScoringContext::fit(corpus, config);
    corpus.iter().map(|s| ctx.score(s).service_score).collect()
}

fn ranking(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    idx
}

pub fn weight_linearity(cases: u32) -> Result<(), String> {
    let weights = (0.0..2.0f64, 0.0..2.0f64, 0.01..2.0f64, 0.05..20.0f64);
    run(cases, (channel_corpus(3), weights), |(corpus, (wv, wa, we, c))| {
        let mut config = SatisfactionConfig::default();
        config.channels.visual = wv;
        config.channels.audio = wa;
        config.channels.event = we;
        let base = scores(&corpus, &config);
        config.channels = config.channels.scaled(c);
        let scaled = scores(&corpus, &config);
        for (b, s) in base.iter().zip(&scaled) {
            prop_assert!((s - c * b).abs() <= 1e-9 * (1.0 + s.abs()));
        }
        let distinct = base.windows(2).all(|w| (w[0] - w[1]).abs() > 1e-9);
        if distinct {
            prop_assert_eq!(ranking(&base), ranking(&scaled));
        }
        Ok(())
    })
}

pub fn duration_negation_consistency(cases: u32) -> Result<(), String> {
    run(cases, (channel_corpus(3), any::<prop::sample::Index>(), any::<prop::sample::Index>(), 0.5..500.0f64), |(corpus, si, ri, extra)| {
        let config = SatisfactionConfig::default();
        let s = si.index(corpus.len());
        let before = scores(&corpus, &config)[s];
        let mut changed = corpus.clone();
        let rec = &mut changed[s].record;
        let r = ri.index(rec.items.len());
        let shift = (extra * 1000.0).round() as Millis;
        rec.items[r].end_ts += shift;
        for run in rec.items.iter_mut().skip(r + 1) {
            run.start_ts += shift;
            run.end_ts += shift;
        }
        let after = scores(&changed, &config)[s];
        prop_assert!(after <= before + 1e-9, "{before} -> {after}");
        Ok(())
    })
}

pub fn emotion_monotonicity(cases: u32) -> Result<(), String> {
    let emotions = prop::collection::vec(prop::collection::vec(prop::collection::vec(emotion(), 1..15), 3..8), 3..8);
    run(cases, (emotions, any::<prop::sample::Index>(), any::<bool>()), |(mut per_service, si, happy)| {
        per_service[0][0][0] = Emotion::Neutral;
        let config = SatisfactionConfig::default();
        let weights = MagnitudeWeights::default();
        let ops = OperationCatalog::default().operations;
        let build = |per_service: &Vec<Vec<Vec<Emotion>>>| -> Vec<ServiceChannels> {
            per_service
                .iter()
                .enumerate()
                .map(|(i, per_op)| {
                    let runs: Vec<(&str, f64)> = (0..per_op.len()).map(|j| (ops[j].as_str(), 60.0)).collect();
                    let op_visual = per_op
                        .iter()
                        .map(|es| {
                            let frames: Vec<FrameFeature> = es
                                .iter()
                                .enumerate()
                                .map(|(k, e)| FrameFeature::new(k as u64, T0 + k as Millis, Some(*e)))
                                .collect();
                            visual_raw_sum(&frames, &weights)
                        })
                        .collect();
                    ServiceChannels {
                        session_id: format!("S{i}"),
                        record: record(&runs),
                        op_visual,
                        op_audio: vec![0.0; per_op.len()],
                        frame_count: 0,
                        utterance_count: 0,
                    }
                })
                .collect()
        };
        let neutral: Vec<(usize, usize, usize)> = per_service
            .iter()
            .enumerate()
            .flat_map(|(s, ops)| {
                ops.iter().enumerate().flat_map(move |(o, es)| {
                    es.iter().enumerate().filter(|(_, e)| **e == Emotion::Neutral).map(move |(f, _)| (s, o, f))
                })
            })
            .collect();
        let (s, o, f) = neutral[si.index(neutral.len())];
        let before = scores(&build(&per_service), &config)[s];
        per_service[s][o][f] = if happy { Emotion::Happiness } else { Emotion::Anger };
        let after = scores(&build(&per_service), &config)[s];
        if happy {
            prop_assert!(after >= before - 1e-9);
        } else {
            prop_assert!(after <= before + 1e-9);
        }
        Ok(())
    })
}

pub fn corpus_standardization(cases: u32) -> Result<(), String> {
    run(cases, channel_corpus(2), |corpus| {
        let ctx = ScoringContext::fit(&corpus, &SatisfactionConfig::default());
        let reports: Vec<_> = corpus.iter().map(|s| ctx.score(s)).collect();
        let v: f64 = reports.iter().map(|r| r.visual_term).sum();
        let a: f64 = reports.iter().map(|r| r.audio_term).sum();
        prop_assert!(v.abs() <= 1e-9 && a.abs() <= 1e-9, "{v} {a}");
        for r in &reports {
            prop_assert!((r.recompute() - r.service_score).abs() <= 1e-12);
        }
        Ok(())
    })
}

pub fn anchor_affine_invariance(cases: u32) -> Result<(), String> {
    let affine = (prop::bool::ANY, 0.1..10.0f64, -50.0..50.0f64);
    run(cases, (channel_corpus(2), affine), |(corpus, (flip, scale, shift))| {
        let a = if flip { -scale } else { scale };
        let config = SatisfactionConfig::default();
        let ctx = ScoringContext::fit(&corpus, &config);
        let before: Vec<_> = corpus.iter().map(|s| ctx.score(s)).collect();
        let margin = before
            .iter()
            .flat_map(|r| &r.per_operation)
            .flat_map(|o| [o.lateral.visual, o.lateral.audio])
            .map(|z| (z.abs() - config.anchor_threshold).abs())
            .fold(f64::MAX, f64::min);
        prop_assume!(margin > 1e-6);
        let moved: Vec<ServiceChannels> = corpus
            .iter()
            .map(|s| {
                let mut s = s.clone();
                s.op_visual.iter_mut().for_each(|x| *x = a * *x + shift);
                s.op_audio.iter_mut().for_each(|x| *x = a * *x + shift);
                s
            })
            .collect();
        let ctx2 = ScoringContext::fit(&moved, &config);
        for (b, s) in before.iter().zip(&moved) {
            let r = ctx2.score(s);
            for (x, y) in b.per_operation.iter().zip(&r.per_operation) {
                prop_assert_eq!(x.anchor, y.anchor);
            }
        }
        Ok(())
    })
}

fn bytes(s: &GeneratedSession) -> Vec<u8> {
    let mut out = Vec::new();
    write_log(&s.log, &grammar(), &mut out).unwrap();
    write_frames(&s.frames, &mut out).unwrap();
    write_utterances(&s.utterances, &mut out).unwrap();
    out.extend(serde_json::to_vec(&s.truth).unwrap());
    out
}

pub fn simulator_determinism(cases: u32) -> Result<(), String> {
    run(cases, (kind(), any::<u64>()), |(kind, seed)| {
        let a = simulate(kind, seed);
        let b = simulate(kind, seed);
        prop_assert_eq!(bytes(&a), bytes(&b));
        Ok(())
    })
}

pub fn label_consistency(cases: u32) -> Result<(), String> {
    let catalog = OperationCatalog::default();
    run(cases, (kind(), any::<u64>()), |(kind, seed)| {
        let s = simulate(kind, seed);
        prop_assert!(s.truth.validate().is_ok());
        prop_assert_eq!(s.truth.label, kind);
        let seg = segment_services(&s.log, &grammar());
        prop_assert_eq!(seg.sessions.len(), 1);
        prop_assert!(seg.diagnostics.is_empty() && seg.open_sessions.is_empty());
        let rec = aggregate_operations(&seg.sessions[0], &catalog).unwrap();
        prop_assert_eq!(&rec, &s.truth.expected_record);
        prop_assert_eq!(rec.repeated_positions(), s.truth.repeated_positions.clone());
        let (start, end) = (rec.start_ts().unwrap(), rec.end_ts().unwrap());
        prop_assert!(s.frames.iter().all(|f| f.validate().is_ok() && f.ts >= start && f.ts < end));
        prop_assert!(s.utterances.iter().all(|u| u.validate().is_ok() && u.start_ts >= start && u.end_ts <= end));
        match kind {
            ScenarioType::DP => prop_assert!(!s.truth.repeated_positions.is_empty()),
            ScenarioType::DA => prop_assert!(!s.truth.prolonged_positions.is_empty()),
            _ => prop_assert!(s.truth.repeated_positions.is_empty() && s.truth.prolonged_positions.is_empty()),
        }
        Ok(())
    })
}

pub fn guideline_conformance(cases: u32) -> Result<(), String> {
    let catalog = OperationCatalog::default();
    let normal = prop::sample::select(vec![ScenarioType::ST, ScenarioType::NM]);
    run(cases, (normal, any::<u64>()), |(kind, seed)| {
        let s = simulate(kind, seed);
        let order: Vec<&str> = s.truth.expected_record.operations().collect();
        let expected: Vec<&str> = catalog.operations.iter().map(String::as_str).collect();
        prop_assert_eq!(order, expected);
        let distinct: BTreeSet<&str> = s.truth.expected_record.operations().collect();
        prop_assert_eq!(distinct.len(), catalog.operations.len());
        Ok(())
    })
}
