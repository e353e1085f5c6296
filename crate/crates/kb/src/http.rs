//! JSON over HTTP. Reads never change state; the only write is a decision.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::service::{KbService, ServiceError};
use crate::store::{Action, StoreError};

const SEARCH_LIMIT: usize = 20;

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
    message: String,
}

pub struct ApiError(ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, kind) = match &self.0 {
            ServiceError::Store(StoreError::NotFound(_)) | ServiceError::UnknownEvent(_) => {
                (StatusCode::NOT_FOUND, "not_found")
            }
            ServiceError::Store(StoreError::Conflict { .. }) => (StatusCode::CONFLICT, "conflict"),
            ServiceError::Corpus { .. } => (StatusCode::SERVICE_UNAVAILABLE, "corpus_unavailable"),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        let body = ErrorBody {
            error: kind.to_string(),
            message: self.0.to_string(),
        };
        (status, Json(body)).into_response()
    }
}

#[derive(Debug, Deserialize)]
struct EntityQuery {
    #[serde(default)]
    q: String,
}

#[derive(Debug, Deserialize)]
struct EventQuery {
    subject: String,
    relation: String,
}

#[derive(Debug, Deserialize)]
pub struct DecisionRequest {
    pub action: Action,
    pub curator: String,
}

type Shared = Arc<KbService>;

async fn entities(State(kb): State<Shared>, Query(q): Query<EntityQuery>) -> impl IntoResponse {
    Json(kb.search_entities(&q.q, SEARCH_LIMIT))
}

async fn relations(State(kb): State<Shared>) -> impl IntoResponse {
    Json(kb.relations())
}

async fn events(State(kb): State<Shared>, Query(q): Query<EventQuery>) -> impl IntoResponse {
    Json(kb.query_objects(&q.subject, &q.relation))
}

async fn candidates(State(kb): State<Shared>, Path(key): Path<String>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(kb.list_candidates(&key)?))
}

async fn decision(
    State(kb): State<Shared>,
    Path(id): Path<String>,
    Json(req): Json<DecisionRequest>,
) -> Result<impl IntoResponse, ApiError> {
    let kb = kb.clone();
    // the store syncs the journal, so keep it off the async workers
    let record = tokio::task::spawn_blocking(move || kb.decide(&id, req.action, &req.curator))
        .await
        .expect("decision task does not panic")?;
    Ok(Json(record))
}

async fn provenance(State(kb): State<Shared>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(kb.provenance(&id)?))
}

pub fn router(kb: Shared) -> Router {
    Router::new()
        .route("/api/entities", get(entities))
        .route("/api/relations", get(relations))
        .route("/api/events", get(events))
        .route("/api/events/:key/candidates", get(candidates))
        .route("/api/records/:id/decision", post(decision))
        .route("/api/records/:id/provenance", get(provenance))
        .with_state(kb)
}

pub async fn serve(kb: KbService, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(kb))).await
}
