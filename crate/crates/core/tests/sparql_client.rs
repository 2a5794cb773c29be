mod support;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use axum::routing::post;
use axum::Router;
use kgvb_core::query_engine::instantiate;
use kgvb_core::sparql_client::{ClientError, EndpointConfig, SparqlClient};
use kgvb_core::triple_store::{evaluate, parse_query, serve, Term};
use support::*;

async fn spawn(router: Router) -> String {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, router).await.unwrap() });
    format!("http://{addr}/sparql")
}

fn client(url: &str, timeout_ms: u64) -> SparqlClient {
    SparqlClient::new(EndpointConfig::new(url).unwrap().with_timeout_ms(timeout_ms).unwrap()).unwrap()
}

#[tokio::test]
async fn one_row_from_embedded_endpoint() {
    let handle = serve(fixture(), 0).await.unwrap();
    let table = client(&handle.sparql_url(), 5000)
        .execute("SELECT ?s WHERE { ?s ?p ?o } LIMIT 1")
        .await
        .unwrap();
    assert_eq!(table.len(), 1);
    assert_eq!(handle.query_requests(), 1);
    handle.shutdown().await;
}

#[tokio::test]
async fn get_mode_matches_post() {
    let handle = serve(fixture(), 0).await.unwrap();
    let q = "SELECT ?s ?o WHERE { ?s <http://purl.org/dc/terms/title> ?o } ORDER BY ?o";
    let post = client(&handle.sparql_url(), 5000).execute(q).await.unwrap();
    let mut cfg = EndpointConfig::new(handle.sparql_url()).unwrap();
    cfg.use_get = true;
    let get = SparqlClient::new(cfg).unwrap().execute(q).await.unwrap();
    assert_eq!(post, get);
    handle.shutdown().await;
}

#[tokio::test]
async fn evidence_over_http_matches_direct_evaluation() {
    let store = fixture();
    let handle = serve(store.clone(), 0).await.unwrap();
    let cat = catalogue();
    let mut b = BTreeMap::new();
    b.insert("symbol".to_owned(), "TP53".to_owned());
    b.insert("title".to_owned(), "Breast Carcinoma".to_owned());
    let text = instantiate(&cat.templates["evidence"], &b).unwrap();
    let remote = client(&handle.sparql_url(), 5000).execute(&text).await.unwrap();
    let local = evaluate(&store, &parse_query(&text).unwrap()).unwrap();
    assert_eq!(remote, local);
    assert!(!remote.is_empty());
    for r in 0..remote.len() {
        assert!(matches!(remote.get(r, "paper"), Some(Term::Iri(i)) if i.starts_with("http://identifiers.org/pubmed/")));
        assert!(matches!(remote.get(r, "sentence"), Some(Term::Literal { .. })));
    }
    handle.shutdown().await;
}

#[tokio::test]
async fn closed_port_is_a_network_error() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = listener.local_addr().unwrap().port();
    drop(listener);
    let err = client(&format!("http://127.0.0.1:{port}/sparql"), 2000).execute("SELECT ?s WHERE { ?s ?p ?o }").await;
    assert!(matches!(err, Err(ClientError::Network(_))), "{err:?}");
}

#[tokio::test]
async fn slow_endpoint_times_out() {
    let timeout_ms = 300;
    let url = spawn(Router::new().route(
        "/sparql",
        post(move || async move {
            tokio::time::sleep(Duration::from_millis(timeout_ms + 200)).await;
            r#"{"head":{"vars":[]},"results":{"bindings":[]}}"#
        }),
    ))
    .await;
    let started = Instant::now();
    let err = client(&url, timeout_ms).execute("SELECT ?s WHERE { ?s ?p ?o }").await;
    assert!(matches!(err, Err(ClientError::Timeout { elapsed_ms }) if elapsed_ms >= timeout_ms));
    assert!(started.elapsed() < Duration::from_millis(timeout_ms + 150));
}

#[tokio::test]
async fn http_errors_carry_status_and_snippet() {
    let handle = serve(fixture(), 0).await.unwrap();
    let err = client(&handle.sparql_url(), 5000).execute("SELECT ?s WHERE { ?s ?p ?o FILTER(?s) }").await;
    match err {
        Err(ClientError::HttpStatus { code: 400, body_snippet }) => assert!(!body_snippet.is_empty()),
        other => panic!("{other:?}"),
    }
    handle.shutdown().await;
}

#[tokio::test]
async fn oversized_response_is_rejected() {
    let handle = serve(fixture(), 0).await.unwrap();
    let mut cfg = EndpointConfig::new(handle.sparql_url()).unwrap();
    cfg.max_response_bytes = 1024;
    let err = SparqlClient::new(cfg).unwrap().execute("SELECT ?s ?p ?o WHERE { ?s ?p ?o }").await;
    assert_eq!(err, Err(ClientError::OversizedResponse { limit: 1024 }));
    handle.shutdown().await;
}

#[tokio::test]
async fn malformed_bodies_are_rejected() {
    let url = spawn(Router::new().route(
        "/sparql",
        post(|| async { r#"{"head":{"vars":["s"]},"results":{"bindings":[{"s":{"type":"bnode","value":"b"}}]}}"# }),
    ))
    .await;
    let err = client(&url, 2000).execute("SELECT ?s WHERE { ?s ?p ?o }").await;
    assert!(matches!(err, Err(ClientError::MalformedResults(m)) if m.contains("bnode")));
}
