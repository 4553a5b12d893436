//! A service whose delighted and upset moments cancel out: the service-level
//! audio term is near zero but both moments surface as anchors.

use anchorscope::event_log::{Millis, OperationCatalog, OperationRun, ServiceRecordVector};
use anchorscope::features::{align_features, Emotion, FrameFeature, Speaker, UtteranceFeature};
use anchorscope::satisfaction::{SatisfactionConfig, ScoringContext};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let catalog = OperationCatalog::default();
    let ops = ["initiate", "identify", "verify", "upload", "review", "execute", "review", "pay", "confirm", "close"];
    let t0: Millis = 1_620_000_000_000;
    let items = ops
        .iter()
        .enumerate()
        .map(|(i, op)| OperationRun {
            operation: op.to_string(),
            count: 1,
            start_ts: t0 + i as Millis * 60_000,
            end_ts: t0 + (i as Millis + 1) * 60_000,
            turn: catalog.owner(op),
        })
        .collect();
    let record = ServiceRecordVector { items };
    let frames: Vec<FrameFeature> = (0..600).map(|i| FrameFeature::new(i, t0 + i as Millis * 1000, Some(Emotion::Neutral))).collect();
    let at = |run: usize| t0 + run as Millis * 60_000 + 10_000;
    let utterances = vec![
        UtteranceFeature::new(at(2), at(2) + 12_000, Speaker::Client, Emotion::Happiness),
        UtteranceFeature::new(at(7), at(7) + 12_000, Speaker::Client, Emotion::Sadness),
    ];

    let config = SatisfactionConfig::default();
    let alignment = align_features(&frames, &utterances, &record)?;
    let target = anchorscope::satisfaction::ServiceChannels::from_alignment("FX-000", &record, &alignment, &config);
    let mut corpus = vec![target.clone()];
    for (i, amount) in [-9.0, -6.0, -3.0, 3.0, 6.0, 9.0].into_iter().enumerate() {
        let mut c = target.clone();
        c.session_id = format!("FX-{:03}", i + 1);
        c.op_audio = vec![0.0; c.op_audio.len()];
        c.op_audio[0] = amount;
        corpus.push(c);
    }
    let report = ScoringContext::fit(&corpus, &config).score(&target);

    println!("service audio term {:.4}", report.audio_term);
    for op in report.per_operation.iter().filter(|o| o.anchor.audio) {
        println!("anchor at {} #{}: z = {:+.3}", op.operation, op.index, op.lateral.audio);
    }
    Ok(())
}
