//! HTTP+JSON API over a scored dataset directory.
//!
//! Every number served comes straight from the `anchorscope` pipeline
//! types; the server adds sorting, paging, the annotation journal and
//! byte-range media serving.

pub mod annotations;
pub mod api;
pub mod config;
pub mod state;
pub mod video;

pub use annotations::{Annotation, AnnotationJournal, NewAnnotation};
pub use api::router;
pub use config::{ServerConfig, DATASET_ENV};
pub use state::{AppState, Snapshot};

use std::io;

use anchorscope::pipeline::PipelineError;
use axum::http::StatusCode;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServerError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Validation(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("no media for service {0}")]
    NoMedia(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("internal error: {0}")]
    Internal(String),
}

impl ServerError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServerError::Validation(_) => StatusCode::BAD_REQUEST,
            ServerError::NotFound(_) | ServerError::NoMedia(_) => StatusCode::NOT_FOUND,
            ServerError::Pipeline(PipelineError::NotFound(_)) => StatusCode::NOT_FOUND,
            ServerError::Pipeline(PipelineError::Validation(_)) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

/// Builds the state and serves until the process is stopped.
pub async fn serve(config: ServerConfig) -> Result<(), ServerError> {
    let state = {
        let config = config.clone();
        tokio::task::spawn_blocking(move || AppState::new(&config))
            .await
            .map_err(|e| ServerError::Internal(e.to_string()))??
    };
    let listener = tokio::net::TcpListener::bind(config.address()).await?;
    tracing::info!(address = %listener.local_addr()?, dataset = %config.dataset_dir.display(), "serving");
    axum::serve(listener, router(state)).await?;
    Ok(())
}
