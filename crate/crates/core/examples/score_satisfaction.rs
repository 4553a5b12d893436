//! Scores satisfaction over a simulated corpus and prints the per-type means.

use anchorscope::event_log::{LogGrammar, OperationCatalog};
use anchorscope::features::align_features;
use anchorscope::satisfaction::{SatisfactionConfig, ScoringContext, ServiceChannels};
use anchorscope::sim::{generate_corpus, CorpusConfig, ScenarioType};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let catalog = OperationCatalog::default();
    let counts: Vec<_> = ScenarioType::ALL.iter().map(|&k| (k, 5)).collect();
    let sessions = generate_corpus(&CorpusConfig::with_counts(&counts, 3), &catalog, &LogGrammar::default())?;
    let config = SatisfactionConfig::default();

    let mut channels = Vec::new();
    for s in &sessions {
        let record = &s.truth.expected_record;
        let alignment = align_features(&s.frames, &s.utterances, record)?;
        channels.push(ServiceChannels::from_alignment(&s.identity.session_id, record, &alignment, &config));
    }
    let ctx = ScoringContext::fit(&channels, &config);

    for kind in ScenarioType::ALL {
        let scores: Vec<f64> = sessions
            .iter()
            .zip(&channels)
            .filter(|(s, _)| s.spec.kind == kind)
            .map(|(_, c)| ctx.score(c).service_score)
            .collect();
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        println!("{kind}: mean CS {mean:>7.3}  {scores:.2?}");
    }

    let report = ctx.score(&channels[0]);
    println!("\n{} breakdown", report.session_id);
    for op in &report.per_operation {
        println!(
            "  {:<10} visual {:>6.2} audio {:>6.2} event {:>6.2}{}",
            op.operation,
            op.lateral.visual,
            op.lateral.audio,
            op.lateral.event,
            if op.anchor.visual || op.anchor.audio || op.anchor.event { "  anchor" } else { "" }
        );
    }
    Ok(())
}
