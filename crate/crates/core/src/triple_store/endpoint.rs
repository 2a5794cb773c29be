//! Minimal SPARQL protocol endpoint over an immutable store.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query as QueryParams, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

use super::{evaluate, parse_query, TripleSet};

pub const RESULTS_CONTENT_TYPE: &str = "application/sparql-results+json";

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("port {0} is already in use")]
    PortInUse(u16),
    #[error("cannot bind endpoint: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone)]
struct EndpointState {
    store: Arc<TripleSet>,
    requests: Arc<AtomicUsize>,
}

/// Running endpoint. Dropping the handle leaves the server running until the
/// runtime shuts down; call [`EndpointHandle::shutdown`] to stop it.
pub struct EndpointHandle {
    addr: SocketAddr,
    requests: Arc<AtomicUsize>,
    shutdown: Option<oneshot::Sender<()>>,
    task: JoinHandle<()>,
}

impl EndpointHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// URL of the query path, e.g. `http://127.0.0.1:7878/sparql`.
    pub fn sparql_url(&self) -> String {
        format!("http://{}/sparql", self.addr)
    }

    /// Number of `/sparql` requests received so far.
    pub fn query_requests(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }

    pub async fn shutdown(mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        let _ = (&mut self.task).await;
    }
}

/// Router exposing `/sparql` and `/health` for the store.
pub fn sparql_router(store: Arc<TripleSet>) -> Router {
    router_with_counter(store, Arc::new(AtomicUsize::new(0)))
}

fn router_with_counter(store: Arc<TripleSet>, requests: Arc<AtomicUsize>) -> Router {
    Router::new()
        .route("/sparql", get(query_get).post(query_post))
        .route("/health", get(health))
        .with_state(EndpointState { store, requests })
}

/// Serves the store on `127.0.0.1:port` (port 0 picks a free port).
pub async fn serve(store: Arc<TripleSet>, port: u16) -> Result<EndpointHandle, ServeError> {
    serve_on(store, SocketAddr::from(([127, 0, 0, 1], port))).await
}

pub async fn serve_on(store: Arc<TripleSet>, addr: SocketAddr) -> Result<EndpointHandle, ServeError> {
    let listener = TcpListener::bind(addr).await.map_err(|e| match e.kind() {
        std::io::ErrorKind::AddrInUse => ServeError::PortInUse(addr.port()),
        _ => ServeError::Io(e),
    })?;
    let addr = listener.local_addr()?;
    let requests = Arc::new(AtomicUsize::new(0));
    let app = router_with_counter(store, requests.clone());
    let (tx, rx) = oneshot::channel::<()>();
    let task = tokio::spawn(async move {
        let _ = axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = rx.await;
            })
            .await;
    });
    tracing::info!(%addr, "SPARQL endpoint listening");
    Ok(EndpointHandle {
        addr,
        requests,
        shutdown: Some(tx),
        task,
    })
}

async fn health(State(state): State<EndpointState>) -> Json<serde_json::Value> {
    Json(serde_json::json!({ "triples": state.store.len() }))
}

async fn query_get(
    State(state): State<EndpointState>,
    QueryParams(params): QueryParams<HashMap<String, String>>,
) -> Response {
    state.requests.fetch_add(1, Ordering::SeqCst);
    match params.get("query") {
        Some(text) => run_query(&state.store, text),
        None => bad_request("missing 'query' parameter"),
    }
}

async fn query_post(State(state): State<EndpointState>, headers: HeaderMap, body: Bytes) -> Response {
    state.requests.fetch_add(1, Ordering::SeqCst);
    let content_type = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .unwrap_or("")
        .split(';')
        .next()
        .unwrap_or("")
        .trim()
        .to_ascii_lowercase();
    let text = match content_type.as_str() {
        "application/x-www-form-urlencoded" => url::form_urlencoded::parse(&body)
            .find(|(k, _)| k == "query")
            .map(|(_, v)| v.into_owned()),
        "application/sparql-query" => String::from_utf8(body.to_vec()).ok(),
        _ => return bad_request("expected application/x-www-form-urlencoded body"),
    };
    match text {
        Some(text) => run_query(&state.store, &text),
        None => bad_request("missing 'query' parameter"),
    }
}

fn run_query(store: &TripleSet, text: &str) -> Response {
    let query = match parse_query(text) {
        Ok(q) => q,
        Err(e) => return bad_request(&e.to_string()),
    };
    match evaluate(store, &query) {
        Ok(table) => ([(header::CONTENT_TYPE, RESULTS_CONTENT_TYPE)], table.to_json()).into_response(),
        Err(e) => bad_request(&e.to_string()),
    }
}

fn bad_request(message: &str) -> Response {
    (StatusCode::BAD_REQUEST, [(header::CONTENT_TYPE, "text/plain; charset=utf-8")], message.to_owned()).into_response()
}
