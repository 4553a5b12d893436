//! Aligns frame and utterance features to a simulated service and prints
//! the per-operation activation summary.

use anchorscope::event_log::{LogGrammar, OperationCatalog};
use anchorscope::features::{align_features, fuse_activation, Polarity, Speaker};
use anchorscope::satisfaction::{visual_raw_sum, MagnitudeWeights};
use anchorscope::sim::{generate_session, ScenarioSpec, ScenarioType, SessionIdentity};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let catalog = OperationCatalog::default();
    let grammar = LogGrammar::default();
    let identity = SessionIdentity::new("DA-001", "a1", "c001", 1_620_000_000_000);
    let session = generate_session(&ScenarioSpec::new(ScenarioType::DA, 7), &catalog, &grammar, &identity)?;
    let record = &session.truth.expected_record;
    let alignment = align_features(&session.frames, &session.utterances, record)?;
    let weights = MagnitudeWeights::default();

    println!("{:<10} {:>7} {:>6} {:>5} {:>9} {:>8} {:>10}", "operation", "secs", "frames", "utts", "face cov", "visual", "activation");
    for (run, op) in record.items.iter().zip(&alignment.operations) {
        let visual = visual_raw_sum(&op.frames, &weights);
        let audio = op
            .utterances
            .iter()
            .filter(|u| u.speaker == Speaker::Client)
            .map(|u| u.polarity)
            .min_by_key(|p| *p != Polarity::Negative);
        let visual_polarity = if visual < 0.0 { Polarity::Negative } else if visual > 0.0 { Polarity::Positive } else { Polarity::Neutral };
        println!(
            "{:<10} {:>7.1} {:>6} {:>5} {:>9.2} {:>8.1} {:>10}",
            run.operation,
            run.duration_s(),
            op.frames.len(),
            op.utterances.len(),
            op.face_coverage,
            visual,
            fuse_activation(visual_polarity, audio)
        );
    }
    println!("dropped frames {}, dropped speech {} ms", alignment.dropped_frames, alignment.dropped_utterance_ms);
    Ok(())
}
