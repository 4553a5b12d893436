#![allow(dead_code)]

pub mod props;

use std::collections::BTreeMap;
use std::path::Path;

use anchorscope::anomaly::TransitionModel;
use anchorscope::event_log::{LogGrammar, Millis, OperationCatalog, OperationRun, Party, ServiceRecordVector};
use anchorscope::features::{align_features, Emotion, FrameFeature, Speaker, UtteranceFeature};
use anchorscope::pipeline::{Analysis, FitPlan, PipelineConfig, ServiceReport};
use anchorscope::satisfaction::{SatisfactionConfig, SatisfactionReport, ScoringContext, ServiceChannels};
use anchorscope::sim::{generate_corpus, write_corpus, CorpusConfig, Manifest, ScenarioType};

pub const T0: Millis = 1_620_000_000_000;

pub fn grammar() -> LogGrammar {
    PipelineConfig::default().grammar
}

/// Writes a simulated corpus with `per_type` sessions of each type.
pub fn write_dataset(dir: &Path, per_type: usize, seed: u64) -> Manifest {
    let counts: Vec<_> = ScenarioType::ALL.iter().map(|&k| (k, per_type)).collect();
    let config = CorpusConfig::with_counts(&counts, seed);
    let catalog = OperationCatalog::default();
    let sessions = generate_corpus(&config, &catalog, &grammar()).unwrap();
    write_corpus(dir, &sessions, &config, &catalog, &grammar()).unwrap()
}

pub fn analyze(dir: &Path) -> Analysis {
    Analysis::run(dir, &PipelineConfig::default(), &FitPlan::default()).unwrap()
}

/// Record with consecutive runs of the given operations and durations.
pub fn record(runs: &[(&str, f64)]) -> ServiceRecordVector {
    let catalog = OperationCatalog::default();
    let mut t = T0;
    let items = runs
        .iter()
        .map(|&(op, secs)| {
            let start = t;
            t += (secs * 1000.0).round() as Millis;
            OperationRun {
                operation: op.to_string(),
                count: 1,
                start_ts: start,
                end_ts: t,
                turn: catalog.owner(op),
            }
        })
        .collect();
    ServiceRecordVector { items }
}

/// Independent Markov oracle: the smoothed matrix rebuilt from raw counts.
pub struct MarkovOracle {
    index: BTreeMap<String, usize>,
    probs: Vec<Vec<f64>>,
}

impl MarkovOracle {
    pub fn fit(training: &[Vec<String>], states: &[String], epsilon: f64) -> Self {
        let mut index = BTreeMap::new();
        for s in states.iter().chain(training.iter().flatten()) {
            let next = index.len();
            index.entry(s.clone()).or_insert(next);
        }
        let m = index.len();
        let mut counts = vec![vec![0.0f64; m]; m];
        for seq in training {
            for pair in seq.windows(2) {
                counts[index[&pair[0]]][index[&pair[1]]] += 1.0;
            }
        }
        let probs = counts
            .iter()
            .map(|row| {
                let total: f64 = row.iter().sum();
                row.iter()
                    .map(|c| if total == 0.0 { 1.0 / m as f64 } else { epsilon + (1.0 - m as f64 * epsilon) * c / total })
                    .collect()
            })
            .collect();
        MarkovOracle { index, probs }
    }

    pub fn probability(&self, seq: &[String], epsilon: f64) -> f64 {
        let mut p = 1.0;
        for pair in seq.windows(2) {
            p *= match (self.index.get(&pair[0]), self.index.get(&pair[1])) {
                (Some(&a), Some(&b)) => self.probs[a][b],
                _ => epsilon,
            };
        }
        p
    }
}

/// Direct lookup product through the fitted model's own matrix.
pub fn lookup_product(model: &TransitionModel, seq: &[String]) -> f64 {
    let pos = |s: &String| model.states.iter().position(|x| x == s);
    seq.windows(2)
        .map(|w| match (pos(&w[0]), pos(&w[1])) {
            (Some(a), Some(b)) => model.probs[a][b],
            _ => model.epsilon,
        })
        .product()
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Mann-Whitney AUC by brute-force pair counting; ties count one half.
pub fn auc(positive: &[f64], negative: &[f64]) -> f64 {
    let mut wins = 0.0;
    for p in positive {
        for n in negative {
            wins += if p > n {
                1.0
            } else if p == n {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / (positive.len() * negative.len()) as f64
}

pub fn sample_sd(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn by_label(reports: &[ServiceReport], label: ScenarioType, metric: impl Fn(&ServiceReport) -> f64) -> Vec<f64> {
    reports.iter().filter(|r| r.label == Some(label)).map(metric).collect()
}

const FIXTURE_OPS: [&str; 10] = [
    "initiate", "identify", "verify", "upload", "review", "execute", "review", "pay", "confirm", "close",
];

fn client_frames(start: Millis, end: Millis) -> Vec<FrameFeature> {
    (0..)
        .map(|i| start + i * 1000)
        .take_while(|&ts| ts < end)
        .enumerate()
        .map(|(i, ts)| FrameFeature::new(i as u64, ts, Some(Emotion::Neutral)))
        .collect()
}

/// A service whose client is delighted in one operation and upset in
/// another by the same amount of speech, plus a corpus of companions with
/// symmetric audio totals.
pub fn counteracted_fixture() -> (ScoringContext, SatisfactionReport) {
    let config = SatisfactionConfig::default();
    let durations: Vec<(&str, f64)> = FIXTURE_OPS.iter().map(|&op| (op, 60.0)).collect();
    let rec = record(&durations);
    let span = (rec.start_ts().unwrap(), rec.end_ts().unwrap());
    let frames = client_frames(span.0, span.1);

    let utter = |run: usize, emotion: Emotion| {
        let r = &rec.items[run];
        UtteranceFeature::new(r.start_ts + 10_000, r.start_ts + 22_000, Speaker::Client, emotion)
    };
    let utterances = vec![utter(2, Emotion::Happiness), utter(7, Emotion::Sadness)];
    let alignment = align_features(&frames, &utterances, &rec).unwrap();
    let target = ServiceChannels::from_alignment("FX-000", &rec, &alignment, &config);

    let mut corpus = vec![target.clone()];
    for (i, amount) in [-9.0, -6.0, -3.0, 3.0, 6.0, 9.0].into_iter().enumerate() {
        let mut c = target.clone();
        c.session_id = format!("FX-{:03}", i + 1);
        c.op_audio = vec![0.0; c.op_audio.len()];
        c.op_audio[0] = amount;
        corpus.push(c);
    }
    let ctx = ScoringContext::fit(&corpus, &config);
    let report = ctx.score(&target);
    (ctx, report)
}

pub fn neutral_client_frames(n: usize) -> Vec<FrameFeature> {
    (0..n)
        .map(|i| FrameFeature::new(i as u64, T0 + 40 * i as Millis, Some(Emotion::Neutral)).with_subject(Party::Client))
        .collect()
}
