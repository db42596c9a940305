use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use sketchchain_core::index::TreeStats;
use sketchchain_core::retrieval::Retriever;
use sketchchain_core::wire::{ErrorBody, QueryRequest};
use sketchchain_core::Error;

use crate::commands::answer;

#[derive(Clone)]
pub struct AppState {
    pub retriever: Arc<Retriever>,
}

#[derive(Debug, Serialize)]
struct Health {
    status: &'static str,
    index: TreeStats,
}

fn error_response(status: StatusCode, code: &str, message: String) -> Response {
    let body = ErrorBody {
        code: code.to_string(),
        message,
    };
    (status, Json(body)).into_response()
}

fn map_error(e: Error) -> Response {
    match e {
        Error::EmptyQuery { code, message } => error_response(StatusCode::UNPROCESSABLE_ENTITY, code, message),
        Error::Json(e) => error_response(StatusCode::BAD_REQUEST, "malformed_body", e.to_string()),
        Error::InvalidInput(m) => error_response(StatusCode::BAD_REQUEST, "invalid_request", m),
        other => {
            log::error!("query failed: {other}");
            error_response(StatusCode::INTERNAL_SERVER_ERROR, "internal", other.to_string())
        }
    }
}

async fn query(State(state): State<AppState>, body: Bytes) -> Response {
    let req = match QueryRequest::parse(&body) {
        Ok(r) => r,
        Err(e) => return map_error(e),
    };
    let retriever = state.retriever.clone();
    match tokio::task::spawn_blocking(move || answer(&retriever, &req)).await {
        Ok(Ok(resp)) => Json(resp).into_response(),
        Ok(Err(e)) => map_error(e),
        Err(e) => {
            log::error!("query task failed: {e}");
            error_response(StatusCode::INTERNAL_SERVER_ERROR, "internal", "query task failed".into())
        }
    }
}

async fn healthz(State(state): State<AppState>) -> Json<impl Serialize> {
    Json(Health {
        status: "ok",
        index: state.retriever.tree().stats(),
    })
}

async fn params(State(state): State<AppState>) -> Json<impl Serialize> {
    Json(state.retriever.params().clone())
}

pub fn router(retriever: Arc<Retriever>) -> Router {
    Router::new()
        .route("/query", post(query))
        .route("/healthz", get(healthz))
        .route("/params", get(params))
        .with_state(AppState { retriever })
}

/// Serves until Ctrl-C.
pub async fn serve(retriever: Arc<Retriever>, addr: SocketAddr) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(retriever))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
