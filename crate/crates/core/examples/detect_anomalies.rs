//! Fits both detectors on normal sessions and scores the rest.

use anchorscope::anomaly::{
    build_duration_vector, fit_normal_space, fit_transition_model, resample_sequence, ComponentSelection,
};
use anchorscope::event_log::{LogGrammar, OperationCatalog};
use anchorscope::sim::{generate_corpus, CorpusConfig, ScenarioType};

const WINDOW: usize = 32;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let catalog = OperationCatalog::default();
    let counts: Vec<_> = ScenarioType::ALL.iter().map(|&k| (k, 20)).collect();
    let sessions = generate_corpus(&CorpusConfig::with_counts(&counts, 11), &catalog, &LogGrammar::default())?;
    let (normal, probe): (Vec<_>, Vec<_>) = sessions.iter().enumerate().partition(|(i, s)| s.spec.kind.is_normal() && i % 20 < 15);
    let normal: Vec<_> = normal.into_iter().map(|(_, s)| s).collect();

    let order = &catalog.operations;
    let vectors: Vec<Vec<f64>> = normal.iter().map(|s| build_duration_vector(&s.truth.expected_record, order)).collect();
    let space = fit_normal_space(&vectors, order, ComponentSelection::VarianceFraction(0.9), 0.95)?;
    let sequences = normal
        .iter()
        .map(|s| resample_sequence(&s.truth.expected_record, WINDOW).map(|r| r.states))
        .collect::<Result<Vec<_>, _>>()?;
    let model = fit_transition_model(&sequences, order, None, WINDOW)?;
    println!("fitted on {} normal sessions, k={}, q={:.3}", normal.len(), space.k, space.q_threshold);

    for (_, s) in probe {
        let record = &s.truth.expected_record;
        let temporal = space.temporal_anomaly(&build_duration_vector(record, order))?;
        let seq = model.score_resampled(&resample_sequence(record, WINDOW)?);
        let odd: Vec<String> = seq.transitions.iter().filter(|t| t.flagged).map(|t| format!("{}>{}", t.from, t.to)).collect();
        println!(
            "{} residual {:>8.3} {}  log P {:>8.2} {}  {}",
            s.identity.session_id,
            temporal.score,
            if temporal.flag { "T" } else { "-" },
            seq.log_prob,
            if seq.flag { "S" } else { "-" },
            odd.join(" ")
        );
    }
    Ok(())
}
