//! Local review service over one split manifest.
//!
//! | method | path                | body / query                                   |
//! |--------|---------------------|------------------------------------------------|
//! | GET    | `/candidates`       | `status` (default `pending`, or `all`), `page`, `page_size` |
//! | GET    | `/image/{id}`       | attack id or source image id, returns PNG      |
//! | POST   | `/decision`         | `{attack_id, verdict, reason?, reviewer, timestamp?}` |
//! | GET    | `/manifest/summary` | status counts                                  |
//!
//! Decisions go through a single write lock, so they are applied one at a
//! time and are visible to the next read.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use log::{info, warn};
use serde::{Deserialize, Serialize};
use tokio::sync::RwLock;

use morphforge::pipeline::{AttackEntry, AttackStatus, Split};
use morphforge::review::{CandidatePage, ReviewDecision, ReviewError, ReviewStore, SubmitOutcome, Verdict};

pub const DEFAULT_PAGE_SIZE: usize = 20;
pub const MAX_PAGE_SIZE: usize = 500;

pub struct AppState {
    store: RwLock<ReviewStore>,
}

impl AppState {
    pub fn new(store: ReviewStore) -> Arc<Self> {
        Arc::new(Self {
            store: RwLock::new(store),
        })
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/candidates", get(candidates))
        .route("/image/{id}", get(image))
        .route("/decision", post(decision))
        .route("/manifest/summary", get(summary))
        .with_state(state)
}

pub async fn serve(manifest: &Path, audit_log: Option<&Path>, bind: SocketAddr) -> anyhow::Result<()> {
    let store = match audit_log {
        Some(log) => ReviewStore::open_with_audit(manifest, log)?,
        None => ReviewStore::open(manifest)?,
    };
    let listener = tokio::net::TcpListener::bind(bind)
        .await
        .with_context(|| format!("binding {bind}"))?;
    info!("reviewing {} on http://{}", manifest.display(), listener.local_addr()?);
    axum::serve(listener, router(AppState::new(store)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    status: StatusCode,
    pub error: String,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, error: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            error: error.into(),
            message: message.into(),
        }
    }
}

impl From<ReviewError> for ApiError {
    fn from(e: ReviewError) -> Self {
        let message = e.to_string();
        match e {
            ReviewError::UnknownAttackId(_) => Self::new(StatusCode::NOT_FOUND, "unknown_attack_id", message),
            ReviewError::InvalidTransition { .. } => Self::new(StatusCode::CONFLICT, "invalid_transition", message),
            ReviewError::InvalidDecision(_) => Self::new(StatusCode::BAD_REQUEST, "invalid_decision", message),
            _ => {
                warn!("{message}");
                Self::new(StatusCode::INTERNAL_SERVER_ERROR, "storage", message)
            }
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self)).into_response()
    }
}

#[derive(Debug, Default, Deserialize)]
pub struct ListQuery {
    pub status: Option<String>,
    pub page: Option<usize>,
    pub page_size: Option<usize>,
}

async fn candidates(
    State(state): State<Arc<AppState>>,
    query: Result<Query<ListQuery>, QueryRejection>,
) -> Result<Json<CandidatePage>, ApiError> {
    let Query(q) = query.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_query", e.body_text()))?;
    let status = match q.status.as_deref() {
        None | Some("") => Some(AttackStatus::Pending),
        Some("all") => None,
        Some(s) => Some(
            AttackStatus::parse(s)
                .ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, "invalid_status", format!("unknown status {s:?}")))?,
        ),
    };
    let page_size = q.page_size.unwrap_or(DEFAULT_PAGE_SIZE);
    if page_size == 0 || page_size > MAX_PAGE_SIZE {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "invalid_page_size",
            format!("page_size must be in 1..={MAX_PAGE_SIZE}"),
        ));
    }
    let page = q.page.unwrap_or(1);
    if page == 0 {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "invalid_page", "pages start at 1"));
    }
    let store = state.store.read().await;
    Ok(Json(store.list(status, page, page_size)))
}

/// Morphs live beside the manifest; source images are read from the
/// manifest's recorded image directory.
fn image_path(store: &ReviewStore, id: &str) -> Option<PathBuf> {
    let m = store.manifest();
    if let Some(a) = m.attack(id) {
        let dir = store.manifest_path().parent().unwrap_or(Path::new("."));
        return Some(dir.join(&a.image));
    }
    m.image_ids()
        .any(|known| known == id)
        .then(|| Path::new(&m.source_images).join(format!("{id}.png")))
}

async fn image(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Response, ApiError> {
    let path = {
        let store = state.store.read().await;
        image_path(&store, &id)
    }
    .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "unknown_image", format!("no image {id:?} in manifest")))?;
    let bytes = tokio::fs::read(&path).await.map_err(|e| {
        ApiError::new(
            StatusCode::NOT_FOUND,
            "image_unreadable",
            format!("{}: {e}", path.display()),
        )
    })?;
    Ok(([(header::CONTENT_TYPE, "image/png"), (header::CACHE_CONTROL, "no-cache")], bytes).into_response())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DecisionRequest {
    pub attack_id: String,
    pub verdict: Verdict,
    #[serde(default)]
    pub reason: Option<String>,
    pub reviewer: String,
    /// UTC seconds; the server clock is used when absent.
    #[serde(default)]
    pub timestamp: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DecisionResponse {
    pub outcome: SubmitOutcome,
    pub attack: AttackEntry,
}

async fn decision(
    State(state): State<Arc<AppState>>,
    body: Result<Json<DecisionRequest>, JsonRejection>,
) -> Result<Json<DecisionResponse>, ApiError> {
    let Json(req) = body.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_decision", e.body_text()))?;
    let timestamp = req
        .timestamp
        .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0));
    let d = ReviewDecision {
        attack_id: req.attack_id,
        verdict: req.verdict,
        reason: req.reason,
        reviewer: req.reviewer,
        timestamp,
    };
    let mut store = state.store.write().await;
    let (attack, outcome) = store.submit(&d)?;
    info!("{} -> {:?} ({:?})", d.attack_id, d.verdict, outcome);
    Ok(Json(DecisionResponse { outcome, attack }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Summary {
    pub split: Split,
    pub pending: usize,
    pub auto_rejected: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub total: usize,
}

async fn summary(State(state): State<Arc<AppState>>) -> Json<Summary> {
    let store = state.store.read().await;
    let c = store.summary();
    Json(Summary {
        split: store.manifest().split,
        pending: c.pending,
        auto_rejected: c.auto_rejected,
        accepted: c.accepted,
        rejected: c.rejected,
        total: c.total(),
    })
}
