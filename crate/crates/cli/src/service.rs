//! HTTP query API over an immutable [`ServiceSnapshot`].
//!
//! Handlers clone the current snapshot `Arc` on entry, so a reload swaps the
//! pointer without disturbing requests already in flight.

use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use anyhow::Context;
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use jointspace::retrieval::RankedResult;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::PipelineConfig;
use crate::snapshot::{is_not_found, ServiceSnapshot, Term};

const DEFAULT_K: usize = 10;
const MAX_K: usize = 10_000;

pub struct AppState {
    snapshot: RwLock<Arc<ServiceSnapshot>>,
    /// Source of reloads; reloading is disabled without it.
    config: Option<PipelineConfig>,
    image_root: Option<PathBuf>,
}

impl AppState {
    pub fn new(snapshot: ServiceSnapshot, config: Option<PipelineConfig>) -> Self {
        let image_root = config.as_ref().and_then(|c| c.service.image_root.clone());
        Self {
            snapshot: RwLock::new(Arc::new(snapshot)),
            config,
            image_root,
        }
    }

    pub fn with_image_root(mut self, root: PathBuf) -> Self {
        self.image_root = Some(root);
        self
    }

    pub fn current(&self) -> Arc<ServiceSnapshot> {
        self.snapshot.read().expect("snapshot lock poisoned").clone()
    }

    pub fn swap(&self, next: ServiceSnapshot) {
        *self.snapshot.write().expect("snapshot lock poisoned") = Arc::new(next);
    }
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<jointspace::Error> for ApiError {
    fn from(e: jointspace::Error) -> Self {
        let status = if is_not_found(&e) {
            StatusCode::NOT_FOUND
        } else {
            StatusCode::BAD_REQUEST
        };
        ApiError(status, e.to_string())
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct QueryRequest {
    pub terms: Vec<Term>,
    pub k: Option<usize>,
}

#[derive(Debug, Deserialize)]
struct KParam {
    k: Option<usize>,
}

fn check_k(k: Option<usize>) -> Result<usize, ApiError> {
    let k = k.unwrap_or(DEFAULT_K);
    if k == 0 || k > MAX_K {
        return Err(ApiError(StatusCode::BAD_REQUEST, format!("k must lie in 1..={MAX_K}")));
    }
    Ok(k)
}

/// Response body listing ranked hits with their tags and thumbnail URL.
pub fn results_body(snap: &ServiceSnapshot, ranked: &RankedResult) -> Value {
    let results: Vec<Value> = ranked
        .hits
        .iter()
        .map(|(id, score)| {
            json!({
                "id": id,
                "score": score,
                "tags": snap.tags_of(id),
                "thumb": format!("/api/image/{id}"),
            })
        })
        .collect();
    json!({ "results": results })
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/query", post(query))
        .route("/api/image/{id}", get(image))
        .route("/api/neighbors/{id}", get(neighbors))
        .route("/api/models", get(models))
        .route("/api/reload", post(reload))
        .with_state(state)
}

async fn health(State(state): State<Arc<AppState>>) -> Json<Value> {
    let snap = state.current();
    Json(json!({
        "status": "ok",
        "method": snap.text.method().name(),
        "dim": snap.index.dim(),
        "index_size": snap.index.len(),
    }))
}

async fn query(
    State(state): State<Arc<AppState>>,
    body: Result<Json<QueryRequest>, JsonRejection>,
) -> Result<Json<Value>, ApiError> {
    let Json(req) = body.map_err(|e| ApiError(StatusCode::BAD_REQUEST, e.body_text()))?;
    let k = check_k(req.k)?;
    if req.terms.is_empty() {
        return Err(ApiError(
            StatusCode::BAD_REQUEST,
            "at least one term is required".into(),
        ));
    }
    let snap = state.current();
    let ranked = snap.query(&req.terms, k)?;
    Ok(Json(results_body(&snap, &ranked)))
}

async fn neighbors(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    params: Result<Query<KParam>, axum::extract::rejection::QueryRejection>,
) -> Result<Json<Value>, ApiError> {
    let Query(params) = params.map_err(|e| ApiError(StatusCode::BAD_REQUEST, e.body_text()))?;
    let k = check_k(params.k)?;
    let snap = state.current();
    let ranked = snap.index.neighbors(&id, k)?;
    let mut body = results_body(&snap, &ranked);
    body["id"] = json!(id);
    Ok(Json(body))
}

async fn models(State(state): State<Arc<AppState>>) -> Json<Value> {
    let snap = state.current();
    let layers: Vec<[usize; 2]> = snap.visual.layers.iter().map(|l| [l.fan_in(), l.fan_out()]).collect();
    Json(json!({
        "text": {
            "method": snap.text.method().name(),
            "dim": snap.text.dim(),
            "vocabulary": snap.text.vocab().len(),
            "config": snap.text.config(),
        },
        "visual": {
            "layers": layers,
            "iterations": snap.visual.iteration,
            "config": snap.visual.config,
        },
        "index": { "size": snap.index.len(), "dim": snap.index.dim() },
    }))
}

async fn reload(State(state): State<Arc<AppState>>) -> Result<Json<Value>, ApiError> {
    let Some(cfg) = state.config.clone() else {
        return Err(ApiError(
            StatusCode::CONFLICT,
            "service was started without a configuration".into(),
        ));
    };
    let next = tokio::task::spawn_blocking(move || ServiceSnapshot::load(&cfg))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, format!("{e:#}")))?;
    let size = next.index.len();
    state.swap(next);
    Ok(Json(json!({ "status": "reloaded", "index_size": size })))
}

const IMAGE_TYPES: [(&str, &str); 5] = [
    ("jpg", "image/jpeg"),
    ("jpeg", "image/jpeg"),
    ("png", "image/png"),
    ("webp", "image/webp"),
    ("gif", "image/gif"),
];

async fn image(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let snap = state.current();
    if snap.index.position(&id).is_none() {
        return Err(ApiError(StatusCode::NOT_FOUND, format!("unknown id `{id}`")));
    }
    let safe = !id.contains(['/', '\\']) && id != ".." && id != ".";
    if let (Some(root), true) = (&state.image_root, safe) {
        for (ext, mime) in IMAGE_TYPES {
            let path = root.join(format!("{id}.{ext}"));
            if let Ok(bytes) = tokio::fs::read(&path).await {
                return Ok(([(header::CONTENT_TYPE, mime)], bytes).into_response());
            }
        }
    }
    Ok((
        [(header::CONTENT_TYPE, "image/svg+xml")],
        placeholder_svg(&id, snap.tags_of(&id)),
    )
        .into_response())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// A 50x50 tile coloured by the item's first tag and labelled with its id.
pub fn placeholder_svg(id: &str, tags: &[String]) -> String {
    let key = tags.first().map_or(id, String::as_str);
    let hue = key.bytes().fold(0u32, |h, b| h.wrapping_mul(31).wrapping_add(b as u32)) % 360;
    format!(
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="50" height="50" viewBox="0 0 50 50"><rect width="50" height="50" fill="hsl({hue},55%,60%)"/><text x="25" y="29" font-size="8" text-anchor="middle" fill="#fff">{}</text></svg>"##,
        escape(id)
    )
}

/// Loads the snapshot named by `cfg` and serves it until interrupted.
pub fn serve_blocking(cfg: PipelineConfig) -> anyhow::Result<()> {
    let snapshot = ServiceSnapshot::load(&cfg)?;
    let bind = cfg.service.bind.clone();
    let state = Arc::new(AppState::new(snapshot, Some(cfg)));
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&bind)
            .await
            .with_context(|| format!("binding {bind}"))?;
        log::info!("listening on {}", listener.local_addr()?);
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}
