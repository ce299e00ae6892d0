//! HTTP routes. Handlers run on the blocking pool since diffusions are CPU bound.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use lgc::Graph;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::api::{ApiError, ClusterRequest, SweepRequest};
use crate::handlers;

type Shared = Arc<Graph>;

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("bad_request", e.to_string(), None))
}

async fn blocking<T, F>(f: F) -> Result<Json<T>, ApiError>
where
    T: Serialize + Send + 'static,
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
{
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map(Json),
        Err(e) => Err(ApiError {
            status: 500,
            ..ApiError::bad_request("internal", e.to_string(), None)
        }),
    }
}

async fn graph_stats(State(g): State<Shared>) -> Response {
    blocking(move || Ok(handlers::handle_graph_stats(&g))).await.into_response()
}

#[derive(Deserialize)]
struct NeighborQuery {
    limit: Option<usize>,
}

async fn neighbors(State(g): State<Shared>, Path(id): Path<String>, Query(q): Query<NeighborQuery>) -> Response {
    let id = match id.parse::<u64>() {
        Ok(id) => id,
        Err(_) => {
            return ApiError::bad_request("out_of_range", format!("not a vertex id: {id}"), Some("id")).into_response()
        }
    };
    blocking(move || handlers::handle_neighbors(&g, id, q.limit)).await.into_response()
}

async fn cluster(State(g): State<Shared>, body: Bytes) -> Response {
    let req: ClusterRequest = match parse_body(&body) {
        Ok(r) => r,
        Err(e) => return e.into_response(),
    };
    blocking(move || handlers::handle_cluster(&g, &req)).await.into_response()
}

async fn sweep(State(g): State<Shared>, body: Bytes) -> Response {
    let req: SweepRequest = match parse_body(&body) {
        Ok(r) => r,
        Err(e) => return e.into_response(),
    };
    blocking(move || handlers::handle_sweep(&g, &req)).await.into_response()
}

async fn schema() -> Response {
    ([(header::CONTENT_TYPE, "application/schema+json")], crate::SCHEMA).into_response()
}

pub fn router(g: Arc<Graph>) -> Router {
    Router::new()
        .route("/api/v1/graph", get(graph_stats))
        .route("/api/v1/vertex/{id}/neighbors", get(neighbors))
        .route("/api/v1/cluster", post(cluster))
        .route("/api/v1/sweep", post(sweep))
        .route("/api/v1/schema", get(schema))
        .with_state(g)
}

/// Serves until Ctrl-C.
pub async fn serve(g: Arc<Graph>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(g))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
