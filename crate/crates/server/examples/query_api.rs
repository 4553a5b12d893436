//! Builds the API over a freshly simulated dataset and queries it in-process.
//! Pass `--listen` to serve on 127.0.0.1:8080 instead.

use anchorscope::event_log::{LogGrammar, OperationCatalog};
use anchorscope::sim::{generate_corpus, write_corpus, CorpusConfig, ScenarioType};
use anchorscope_server::{router, serve, AppState, ServerConfig};
use axum::body::{to_bytes, Body};
use axum::http::Request;
use tower::ServiceExt;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let counts: Vec<_> = ScenarioType::ALL.iter().map(|&k| (k, 5)).collect();
    let corpus = CorpusConfig::with_counts(&counts, 42);
    let (catalog, grammar) = (OperationCatalog::default(), LogGrammar::default());
    write_corpus(dir.path(), &generate_corpus(&corpus, &catalog, &grammar)?, &corpus, &catalog, &grammar)?;

    let config = ServerConfig {
        dataset_dir: dir.path().to_path_buf(),
        ..ServerConfig::default()
    };
    if std::env::args().any(|a| a == "--listen") {
        serve(config).await?;
        return Ok(());
    }

    let app = router(AppState::new(&config)?);
    for uri in ["/health", "/services?sort=cs_total&order=asc&per_page=3", "/anchors?top=3", "/services/DP-001/record"] {
        let response = app.clone().oneshot(Request::get(uri).body(Body::empty())?).await?;
        let status = response.status();
        let body = to_bytes(response.into_body(), usize::MAX).await?;
        let text = String::from_utf8_lossy(&body);
        let shown: String = text.chars().take(400).collect();
        println!("GET {uri} -> {status}\n{shown}\n");
    }
    Ok(())
}
