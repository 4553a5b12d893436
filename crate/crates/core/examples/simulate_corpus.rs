//! Generates a labeled corpus and writes it to a directory.
//!
//! `cargo run --example simulate_corpus -- OUT_DIR [SEED]`

use anchorscope::event_log::{LogGrammar, OperationCatalog};
use anchorscope::sim::{generate_corpus, write_corpus, CorpusConfig, ScenarioType};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "dataset".into());
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(42);

    let counts: Vec<_> = ScenarioType::ALL.iter().map(|&k| (k, 10)).collect();
    let config = CorpusConfig::with_counts(&counts, seed);
    let catalog = OperationCatalog::default();
    let grammar = LogGrammar::default();
    let sessions = generate_corpus(&config, &catalog, &grammar)?;
    let manifest = write_corpus(out.as_ref(), &sessions, &config, &catalog, &grammar)?;

    for s in &sessions {
        let ops: Vec<&str> = s.truth.expected_record.operations().collect();
        println!("{} {:>4} frames {:>3} utterances  {}", s.identity.session_id, s.frames.len(), s.utterances.len(), ops.join(" > "));
    }
    println!("wrote {} sessions to {out}", manifest.sessions.len());
    Ok(())
}
