use std::time::Instant;

use anchorscope::pipeline::{
    rank_anchors, sort_summaries, AnchorRow, FeatureWindow, RecordTimeline, ServiceReport, ServiceSummary,
    SortMetric,
};
use axum::body::Body;
use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::annotations::{Annotation, NewAnnotation};
use crate::state::AppState;
use crate::video::{self, ByteRange};
use crate::ServerError;

const DEFAULT_PER_PAGE: usize = 50;
const MAX_PER_PAGE: usize = 500;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/services", get(list_services))
        .route("/services/{id}", get(service_detail))
        .route("/services/{id}/record", get(service_record))
        .route("/services/{id}/features", get(service_features))
        .route("/anchors", get(anchors))
        .route("/annotations", post(post_annotation).get(get_annotations))
        .route("/videos/{id}", get(video))
        .route("/admin/refit", post(refit))
        .layer(middleware::from_fn(log_requests))
        .with_state(state)
}

async fn log_requests(req: Request, next: Next) -> Response {
    let method = req.method().clone();
    let uri = req.uri().clone();
    let started = Instant::now();
    let response = next.run(req).await;
    tracing::info!(
        method = %method,
        path = %uri,
        status = response.status().as_u16(),
        elapsed_ms = started.elapsed().as_secs_f64() * 1000.0,
        "request"
    );
    response
}

async fn health(State(state): State<AppState>) -> Json<serde_json::Value> {
    let snap = state.snapshot();
    Json(serde_json::json!({ "status": "ok", "services": snap.summaries.len() }))
}

#[derive(Debug, Default, Deserialize)]
pub struct ListParams {
    pub sort: Option<String>,
    pub order: Option<String>,
    pub page: Option<usize>,
    pub per_page: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ServicePage {
    pub total: usize,
    pub page: usize,
    pub per_page: usize,
    pub sort: String,
    pub order: String,
    pub items: Vec<ServiceSummary>,
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> Result<T, ServerError> {
    q.map(|Query(v)| v).map_err(|e| ServerError::Validation(e.body_text()))
}

async fn list_services(
    State(state): State<AppState>,
    params: Result<Query<ListParams>, QueryRejection>,
) -> Result<Json<ServicePage>, ServerError> {
    let params = query(params)?;
    let metric: SortMetric = params
        .sort
        .as_deref()
        .unwrap_or("cs_total")
        .parse()
        .map_err(ServerError::Validation)?;
    let order = params.order.as_deref().unwrap_or("desc");
    let descending = match order {
        "desc" => true,
        "asc" => false,
        other => {
            return Err(ServerError::Validation(format!(
                "unknown order {other:?}; valid orders: asc, desc"
            )))
        }
    };
    let page = params.page.unwrap_or(1);
    let per_page = params.per_page.unwrap_or(DEFAULT_PER_PAGE);
    if page == 0 || per_page == 0 || per_page > MAX_PER_PAGE {
        return Err(ServerError::Validation(format!(
            "page must be >= 1 and per_page in 1..={MAX_PER_PAGE}"
        )));
    }
    let snap = state.snapshot();
    let mut rows = snap.summaries.clone();
    sort_summaries(&mut rows, metric, descending);
    let total = rows.len();
    let items = rows.into_iter().skip((page - 1) * per_page).take(per_page).collect();
    Ok(Json(ServicePage {
        total,
        page,
        per_page,
        sort: metric.as_str().to_string(),
        order: order.to_string(),
        items,
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ServiceDetail {
    pub summary: ServiceSummary,
    pub report: ServiceReport,
}

async fn service_detail(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<ServiceDetail>, ServerError> {
    let snap = state.snapshot();
    let analysis = snap.analysis()?;
    let report = analysis
        .report(&id)
        .ok_or_else(|| ServerError::NotFound(format!("service {id}")))?;
    let summary = snap
        .summaries
        .iter()
        .find(|s| s.session_id == id)
        .ok_or_else(|| ServerError::NotFound(format!("service {id}")))?;
    Ok(Json(ServiceDetail {
        summary: summary.clone(),
        report: report.clone(),
    }))
}

async fn service_record(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<RecordTimeline>, ServerError> {
    let snap = state.snapshot();
    Ok(Json(snap.analysis()?.timeline(&id)?))
}

#[derive(Debug, Default, Deserialize)]
pub struct FeatureParams {
    pub op: Option<usize>,
    pub from: Option<i64>,
    pub to: Option<i64>,
}

async fn service_features(
    State(state): State<AppState>,
    Path(id): Path<String>,
    params: Result<Query<FeatureParams>, QueryRejection>,
) -> Result<Json<FeatureWindow>, ServerError> {
    let params = query(params)?;
    let op = params
        .op
        .ok_or_else(|| ServerError::Validation("op (operation index) is required".into()))?;
    let snap = state.snapshot();
    Ok(Json(snap.analysis()?.features(&id, op, params.from, params.to)?))
}

#[derive(Debug, Default, Deserialize)]
pub struct AnchorParams {
    pub top: Option<usize>,
    pub session_id: Option<String>,
}

async fn anchors(
    State(state): State<AppState>,
    params: Result<Query<AnchorParams>, QueryRejection>,
) -> Result<Json<Vec<AnchorRow>>, ServerError> {
    let params = query(params)?;
    let snap = state.snapshot();
    let Some(analysis) = &snap.analysis else {
        return Ok(Json(Vec::new()));
    };
    let mut rows = rank_anchors(&analysis.reports);
    if let Some(id) = &params.session_id {
        rows.retain(|r| &r.session_id == id);
    }
    rows.truncate(params.top.unwrap_or(20));
    Ok(Json(rows))
}

async fn post_annotation(
    State(state): State<AppState>,
    body: Result<Json<NewAnnotation>, JsonRejection>,
) -> Result<(StatusCode, Json<Annotation>), ServerError> {
    let Json(new) = body.map_err(|e| ServerError::Validation(e.body_text()))?;
    let exists = state
        .snapshot()
        .summaries
        .iter()
        .any(|s| s.session_id == new.session_id);
    if !exists {
        return Err(ServerError::NotFound(format!("service {}", new.session_id)));
    }
    let shared = state.0.clone();
    let record = tokio::task::spawn_blocking(move || shared.journal.append(new))
        .await
        .map_err(|e| ServerError::Internal(e.to_string()))??;
    Ok((StatusCode::CREATED, Json(record)))
}

#[derive(Debug, Default, Deserialize)]
pub struct AnnotationParams {
    pub session_id: Option<String>,
}

async fn get_annotations(
    State(state): State<AppState>,
    params: Result<Query<AnnotationParams>, QueryRejection>,
) -> Result<Json<Vec<Annotation>>, ServerError> {
    let params = query(params)?;
    Ok(Json(state.0.journal.for_session(params.session_id.as_deref())))
}

async fn video(State(state): State<AppState>, Path(id): Path<String>, headers: HeaderMap) -> Result<Response, ServerError> {
    let snap = state.snapshot();
    let analysis = snap.analysis()?;
    let session = analysis
        .corpus
        .get(&id)
        .ok_or_else(|| ServerError::NotFound(format!("service {id}")))?;
    let Some(path) = video::locate(&state.0.workspace.root, &session.meta) else {
        return Err(ServerError::NoMedia(id));
    };
    let len = tokio::fs::metadata(&path).await?.len();
    let range = headers.get(header::RANGE).and_then(|v| v.to_str().ok());
    let ctype = video::content_type(&path);
    let response = match video::parse_range(range, len) {
        ByteRange::Full => {
            let bytes = tokio::fs::read(&path).await?;
            Response::builder()
                .status(StatusCode::OK)
                .header(header::CONTENT_TYPE, ctype)
                .header(header::ACCEPT_RANGES, "bytes")
                .header(header::CONTENT_LENGTH, bytes.len())
                .body(Body::from(bytes))
        }
        ByteRange::Partial(start, end) => {
            let bytes = video::read_slice(&path, start, end).await?;
            Response::builder()
                .status(StatusCode::PARTIAL_CONTENT)
                .header(header::CONTENT_TYPE, ctype)
                .header(header::ACCEPT_RANGES, "bytes")
                .header(header::CONTENT_RANGE, format!("bytes {start}-{end}/{len}"))
                .header(header::CONTENT_LENGTH, bytes.len())
                .body(Body::from(bytes))
        }
        ByteRange::Unsatisfiable => Response::builder()
            .status(StatusCode::RANGE_NOT_SATISFIABLE)
            .header(header::CONTENT_RANGE, format!("bytes */{len}"))
            .body(Body::empty()),
    };
    response.map_err(|e| ServerError::Internal(e.to_string()))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RefitResult {
    pub services: usize,
}

async fn refit(State(state): State<AppState>) -> Result<Json<RefitResult>, ServerError> {
    let snap = state.refit().await?;
    Ok(Json(RefitResult {
        services: snap.summaries.len(),
    }))
}

impl IntoResponse for ServerError {
    fn into_response(self) -> Response {
        let status = self.status();
        if status.is_server_error() {
            tracing::error!(error = %self, "request failed");
        }
        let mut body = serde_json::json!({ "error": self.to_string() });
        if matches!(self, ServerError::NoMedia(_)) {
            body["placeholder"] = serde_json::Value::Bool(true);
        }
        (status, Json(body)).into_response()
    }
}
