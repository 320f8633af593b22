use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

use graphilosophy::corpus::{Corpus, Normalizer};
use graphilosophy::embedding::HashEmbedder;
use graphilosophy::extraction::{default_speakers, default_taxonomy};
use graphilosophy::graph::{self, stats, Graph};
use graphilosophy::pipeline::{build_graph, PipelineConfig, MINI_CORPUS_DIR};
use graphilosophy::query::{bfs_subgraph, Filters};
use graphilosophy_server::{router, AppState, ServerError, API_SCHEMA_VERSION};

fn mini_graph() -> Graph {
    let corpus = Corpus::load(Path::new(MINI_CORPUS_DIR), &Normalizer::default()).unwrap();
    build_graph(
        &corpus,
        &PipelineConfig::default(),
        &default_taxonomy(),
        &default_speakers(),
        &HashEmbedder::default(),
    )
    .unwrap()
    .0
}

fn app() -> Router {
    let state = AppState::new(mini_graph(), Box::new(HashEmbedder::default())).unwrap();
    router(Arc::new(state), &[])
}

async fn get_raw(app: &Router, uri: &str) -> (StatusCode, Vec<u8>) {
    let resp = app
        .clone()
        .oneshot(Request::builder().uri(uri).header("origin", "http://example.org").body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = resp.status();
    assert!(resp.headers().contains_key("access-control-allow-origin"));
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    let (status, bytes) = get_raw(app, uri).await;
    let v: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(v["schema_version"], API_SCHEMA_VERSION);
    (status, v)
}

fn error_code(v: &Value) -> &str {
    assert!(v.get("data").is_none());
    v["error"]["code"].as_str().unwrap()
}

#[tokio::test]
async fn stats_match_direct_computation() {
    let app = app();
    let (status, v) = get(&app, "/stats").await;
    assert_eq!(status, StatusCode::OK);
    let direct = stats(&mini_graph()).unwrap();
    assert_eq!(v["data"]["density"].as_f64().unwrap(), direct.density);
    assert_eq!(v["data"]["node_count"], direct.node_count);
    assert_eq!(v["data"]["per_relation"]["APPEARS_IN"]["count"], direct.per_relation[&graphilosophy::RelationType::AppearsIn].count);
}

#[tokio::test]
async fn ontology_and_concepts() {
    let app = app();
    let (_, v) = get(&app, "/ontology").await;
    assert_eq!(v["data"]["classes"].as_array().unwrap().len(), 20);
    assert_eq!(v["data"]["relations"].as_array().unwrap().len(), 18);
    assert_eq!(v["data"]["layers"].as_array().unwrap().len(), 6);
    let (_, v) = get(&app, "/concepts").await;
    let concepts = v["data"].as_array().unwrap();
    assert_eq!(concepts.len(), 23);
    assert!(concepts.iter().any(|c| c["id"] == "PHILOSOPHICAL_CONCEPT:仁"));
}

#[tokio::test]
async fn node_lookup() {
    let app = app();
    let (status, v) = get(&app, "/node/UNKNOWN").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(error_code(&v), "NOT_FOUND");

    let (status, v) = get(&app, "/node/SENTENCE:LY.1-1.1.1").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["data"]["node"]["class"], "SENTENCE");
    let edges = v["data"]["edges"].as_array().unwrap();
    for rel in ["HAS_HAN_FORM", "HAS_HANVIET_FORM", "HAS_VIETNAMESE_TRANSLATION"] {
        assert!(edges.iter().any(|e| e["relation"] == rel), "{rel}");
    }

    // chunk ids carry `#`, which must arrive percent-encoded
    let (status, v) = get(&app, "/node/COMMENTARY_CHUNK:C-ZX-3.3%230").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["data"]["node"]["id"], "COMMENTARY_CHUNK:C-ZX-3.3#0");
}

#[tokio::test]
async fn subgraph_matches_bfs() {
    let app = app();
    let g = mini_graph();
    let seed = "PHILOSOPHICAL_CONCEPT:仁";
    let (status, v) = get(&app, "/subgraph?seed=PHILOSOPHICAL_CONCEPT:%E4%BB%81&depth=1").await;
    assert_eq!(status, StatusCode::OK);
    let direct = bfs_subgraph(&g, &[seed.to_string()], 1, &Filters::default()).unwrap().payload();
    assert_eq!(v["data"], serde_json::to_value(&direct).unwrap());

    let (_, v) = get(&app, "/subgraph?seed=PHILOSOPHICAL_CONCEPT:%E4%BB%81&depth=2&layers=Conceptual").await;
    assert!(v["data"]["nodes"].as_array().unwrap().iter().all(|n| n["layer"] == "Conceptual"));

    let (status, v) = get(&app, "/subgraph?seed=NOPE").await;
    assert_eq!((status, error_code(&v)), (StatusCode::NOT_FOUND, "NOT_FOUND"));
    let (status, v) = get(&app, "/subgraph?seed=SENTENCE:LY.1-1.1.1&layers=Nowhere").await;
    assert_eq!((status, error_code(&v)), (StatusCode::BAD_REQUEST, "BAD_REQUEST"));
    let (status, v) = get(&app, "/subgraph?depth=1").await;
    assert_eq!((status, error_code(&v)), (StatusCode::BAD_REQUEST, "BAD_REQUEST"));
    let (status, _) = get(&app, "/subgraph?seed=SENTENCE:LY.1-1.1.1&depth=x").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn search_modes_and_paging() {
    let app = app();
    let (status, v) = get(&app, "/search?q=&mode=exact").await;
    assert_eq!((status, error_code(&v)), (StatusCode::BAD_REQUEST, "BAD_REQUEST"));
    let (status, _) = get(&app, "/search?q=x&mode=fuzzy").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = get(&app, "/search?q=x&k=0").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (_, v) = get(&app, "/search?q=%E6%9B%BE%E5%AD%90%E6%9B%B0:%E5%90%BE%E6%97%A5%E4%B8%89%E7%9C%81%E5%90%BE%E8%BA%AB&mode=exact").await;
    let hits = v["data"]["hits"].as_array().unwrap();
    assert_eq!(hits.len(), 1);
    assert_eq!(hits[0]["doc_id"], "HAN_SENTENCE:LY.1-4.1.1");

    let (_, all) = get(&app, "/search?q=nh%C3%A2n&mode=semantic&k=6").await;
    let (_, page) = get(&app, "/search?q=nh%C3%A2n&mode=semantic&k=6&offset=2&limit=3").await;
    let all_hits = all["data"]["hits"].as_array().unwrap();
    assert_eq!(all["data"]["total"], 6);
    assert_eq!(page["data"]["hits"].as_array().unwrap()[..], all_hits[2..5]);

    let (status, v) = get(&app, "/search?q=nh%C3%A2n%20ngh%C4%A9a&mode=hybrid&k=5").await;
    assert_eq!(status, StatusCode::OK);
    assert!(!v["data"]["hits"].as_array().unwrap().is_empty());
}

#[tokio::test]
async fn concept_pair_endpoint() {
    let app = app();
    let (status, v) = get(&app, "/concept-pair?a=%E4%BB%81&b=l%E1%BB%85").await;
    assert_eq!(status, StatusCode::OK);
    let nodes = v["data"]["nodes"].as_array().unwrap();
    assert!(nodes.iter().any(|n| n["id"] == "SENTENCE:LY.3-3.2.1"));
    assert!(v["data"]["edges"].as_array().unwrap().iter().any(|e| e["relation"] == "CO_OCCURS_WITH"));
    let (status, v) = get(&app, "/concept-pair?a=%E4%BB%81&b=zzz").await;
    assert_eq!((status, error_code(&v)), (StatusCode::NOT_FOUND, "NOT_FOUND"));
    let (status, _) = get(&app, "/concept-pair?a=%E4%BB%81").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn unknown_route_has_envelope() {
    let (status, v) = get(&app(), "/nothing/here").await;
    assert_eq!((status, error_code(&v)), (StatusCode::NOT_FOUND, "NOT_FOUND"));
}

#[tokio::test]
async fn responses_are_stable_and_file_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("graph.jsonl");
    graph::save(&mini_graph(), &path).unwrap();
    let before = std::fs::read(&path).unwrap();
    let state = AppState::load(&path, Box::new(HashEmbedder::default())).unwrap();
    let app = router(Arc::new(state), &["http://example.org".to_string()]);
    let uris = [
        "/stats",
        "/concepts",
        "/search?q=h%E1%BB%8Dc&mode=hybrid",
        "/subgraph?seed=SENTENCE:LY.1-1.1.1&depth=2",
        "/node/HAN_WORD:%E5%AD%B8",
    ];
    for uri in uris {
        let first = get_raw(&app, uri).await;
        for _ in 0..5 {
            assert_eq!(get_raw(&app, uri).await, first, "{uri}");
        }
    }
    assert_eq!(std::fs::read(&path).unwrap(), before);
}

#[test]
fn invalid_graph_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsonl");
    std::fs::write(&path, "{\"record\":\"header\",\"format_version\":7}\n").unwrap();
    assert!(matches!(
        AppState::load(&path, Box::new(HashEmbedder::default())),
        Err(ServerError::Graph(_))
    ));
}
