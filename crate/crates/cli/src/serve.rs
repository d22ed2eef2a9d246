use std::io::Write;
use std::sync::Arc;

use anyhow::{Context, Result};
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use redebunk_core::engine::EngineError;
use redebunk_core::QueryEngine;
use serde::Deserialize;

use crate::exit::ResultExt;

#[derive(Clone)]
struct AppState {
    engine: Arc<QueryEngine>,
    k: usize,
    threshold: f64,
}

#[derive(Debug, Deserialize)]
struct SearchParams {
    q: Option<String>,
    k: Option<usize>,
    threshold: Option<f64>,
}

fn bad_request(msg: impl Into<String>) -> Response {
    (StatusCode::BAD_REQUEST, msg.into()).into_response()
}

async fn health() -> &'static str {
    "ok"
}

async fn search(State(state): State<AppState>, params: Result<Query<SearchParams>, axum::extract::rejection::QueryRejection>) -> Response {
    let Query(params) = match params {
        Ok(p) => p,
        Err(e) => return bad_request(e.body_text()),
    };
    let Some(q) = params.q.filter(|q| !q.trim().is_empty()) else {
        return bad_request("missing query parameter `q`");
    };
    let k = params.k.unwrap_or(state.k);
    if k == 0 {
        return bad_request("k must be at least 1");
    }
    let threshold = params.threshold.unwrap_or(state.threshold);
    let engine = state.engine.clone();
    let result = tokio::task::spawn_blocking(move || engine.query(&q, k, threshold)).await;
    match result {
        Ok(Ok(hits)) => Json(hits).into_response(),
        Ok(Err(EngineError::InvalidThreshold(t))) => bad_request(format!("threshold {t} is outside [0, 1]")),
        Ok(Err(e @ EngineError::Backend(_))) => (StatusCode::SERVICE_UNAVAILABLE, e.to_string()).into_response(),
        Ok(Err(e)) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

pub fn router(engine: QueryEngine, k: usize, threshold: f64) -> Router {
    let state = AppState {
        engine: Arc::new(engine),
        k,
        threshold,
    };
    Router::new()
        .route("/health", get(health))
        .route("/search", get(search))
        .with_state(state)
}

/// Serves the engine until the process is killed. The bound address is
/// printed on stdout once the socket is listening.
pub fn run(engine: QueryEngine, bind: &str, k: usize, threshold: f64) -> Result<()> {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .context("starting runtime")?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(bind)
            .await
            .with_context(|| format!("binding {bind}"))
            .usage()?;
        let addr = listener.local_addr()?;
        println!("listening on http://{addr}");
        std::io::stdout().flush()?;
        axum::serve(listener, router(engine, k, threshold))
            .await
            .context("serving")?;
        Ok(())
    })
}
