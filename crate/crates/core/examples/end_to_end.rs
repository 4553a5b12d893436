//! Simulate, ingest, fit, score and export in one go.
//!
//! `cargo run --example end_to_end -- [WORKDIR]`

use anchorscope::event_log::{LogGrammar, OperationCatalog};
use anchorscope::pipeline::{anchors_table, export_table, rank_anchors, Analysis, FitPlan, PipelineConfig, Workspace};
use anchorscope::sim::{generate_corpus, write_corpus, CorpusConfig, ScenarioType};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scratch = tempfile::tempdir()?;
    let dir = std::env::args().nth(1).map(Into::into).unwrap_or_else(|| scratch.path().to_path_buf());

    let counts: Vec<_> = ScenarioType::ALL.iter().map(|&k| (k, 10)).collect();
    let config = CorpusConfig::with_counts(&counts, 42);
    let catalog = OperationCatalog::default();
    let grammar = LogGrammar::default();
    write_corpus(&dir, &generate_corpus(&config, &catalog, &grammar)?, &config, &catalog, &grammar)?;

    let analysis = Analysis::run(&dir, &PipelineConfig::default(), &FitPlan::default())?;
    analysis.save(&Workspace::new(&dir))?;

    print!("{}", export_table(&analysis.reports));
    let mut anchors = rank_anchors(&analysis.reports);
    anchors.truncate(10);
    print!("\n{}", anchors_table(&anchors));
    Ok(())
}
