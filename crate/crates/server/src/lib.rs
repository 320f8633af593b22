//! Read-only HTTP API over a loaded graph.
//!
//! Every response body is an envelope `{schema_version, data}` or
//! `{schema_version, error: {code, message}}`.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use axum::extract::rejection::QueryRejection;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

use graphilosophy::embedding::EmbeddingProvider;
use graphilosophy::graph::{self, stats, Graph, GraphError, GraphStats, Node};
use graphilosophy::ontology::{self, EntityClass, Layer, RelationType};
use graphilosophy::query::{
    bfs_subgraph, Filters, PayloadEdge, QueryEngine, QueryError, QueryMode, SubgraphPayload,
};
use graphilosophy::retrieval::{Hit, RetrievalError};

pub const API_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_BIND: &str = "127.0.0.1:8750";
pub const ENV_BIND: &str = "GRAPHILOSOPHY_BIND";

const MAX_DEPTH: usize = 6;
const MAX_K: usize = 1000;

#[derive(Debug, Error)]
pub enum ServerError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("graph has {0} schema violations")]
    InvalidGraph(usize),
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: String, source: std::io::Error },
    #[error("server error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorCode {
    BadRequest,
    NotFound,
    Unavailable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        Self { code: ErrorCode::BadRequest, message: message.into() }
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self { code: ErrorCode::NotFound, message: message.into() }
    }

    fn unavailable(message: impl Into<String>) -> Self {
        Self { code: ErrorCode::Unavailable, message: message.into() }
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        let msg = e.to_string();
        match e {
            QueryError::UnknownSeed(_) | QueryError::UnknownConcept(_) => Self::not_found(msg),
            QueryError::EmptyQuery | QueryError::InvalidRequest(_) => Self::bad_request(msg),
            QueryError::Retrieval(RetrievalError::InvalidK) => Self::bad_request(msg),
            QueryError::Retrieval(_) => Self::unavailable(msg),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.code {
            ErrorCode::BadRequest => StatusCode::BAD_REQUEST,
            ErrorCode::NotFound => StatusCode::NOT_FOUND,
            ErrorCode::Unavailable => StatusCode::SERVICE_UNAVAILABLE,
        };
        (status, Json(json!({ "schema_version": API_SCHEMA_VERSION, "error": self }))).into_response()
    }
}

/// Success body `{schema_version, data}` exactly as the API sends it.
pub fn envelope<T: Serialize>(data: &T) -> Vec<u8> {
    #[derive(Serialize)]
    struct Envelope<'a, T> {
        schema_version: u32,
        data: &'a T,
    }
    serde_json::to_vec(&Envelope { schema_version: API_SCHEMA_VERSION, data }).expect("payload serializes")
}

fn ok<T: Serialize>(data: T) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], envelope(&data)).into_response()
}

type ApiResult = Result<Response, ApiError>;
type Params = Result<Query<HashMap<String, String>>, QueryRejection>;

/// Immutable state shared by all handlers.
pub struct AppState {
    engine: QueryEngine,
    stats: Option<GraphStats>,
}

impl AppState {
    /// Fails when the graph carries ontology violations.
    pub fn new(graph: Graph, embedder: Box<dyn EmbeddingProvider>) -> Result<Self, ServerError> {
        let violations = graph.schema_violations();
        if violations > 0 {
            return Err(ServerError::InvalidGraph(violations));
        }
        let stats = stats(&graph).ok();
        Ok(Self { engine: QueryEngine::new(graph, embedder), stats })
    }

    pub fn load(path: &Path, embedder: Box<dyn EmbeddingProvider>) -> Result<Self, ServerError> {
        Self::new(graph::load(path)?, embedder)
    }

    pub fn graph(&self) -> &Graph {
        self.engine.graph()
    }
}

/// The API routes. `cors_origins` empty means any origin.
pub fn router(state: Arc<AppState>, cors_origins: &[String]) -> Router {
    let origins: Vec<HeaderValue> = cors_origins.iter().filter_map(|o| o.parse().ok()).collect();
    let cors = if origins.is_empty() {
        CorsLayer::new().allow_origin(Any)
    } else {
        CorsLayer::new().allow_origin(AllowOrigin::list(origins))
    };
    Router::new()
        .route("/stats", get(get_stats))
        .route("/ontology", get(get_ontology))
        .route("/node/{id}", get(get_node))
        .route("/search", get(get_search))
        .route("/subgraph", get(get_subgraph))
        .route("/concepts", get(get_concepts))
        .route("/concept-pair", get(get_concept_pair))
        .fallback(|| async { ApiError::not_found("no such endpoint") })
        .layer(cors)
        .with_state(state)
}

/// [`serve`] on a fresh multi-threaded runtime.
pub fn run(state: AppState, bind: &str, cors_origins: &[String]) -> Result<(), ServerError> {
    tokio::runtime::Runtime::new()?.block_on(serve(state, bind, cors_origins))
}

/// Bind and serve until ctrl-c, draining in-flight requests on shutdown.
pub async fn serve(state: AppState, bind: &str, cors_origins: &[String]) -> Result<(), ServerError> {
    let listener = tokio::net::TcpListener::bind(bind)
        .await
        .map_err(|source| ServerError::Bind { addr: bind.to_string(), source })?;
    let addr: SocketAddr = listener.local_addr()?;
    tracing::info!(%addr, nodes = state.graph().node_count(), "serving graph");
    let app = router(Arc::new(state), cors_origins);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

// ── parameters ───────────────────────────────────────────────────────────────

struct QueryParams(HashMap<String, String>);

impl QueryParams {
    fn from(params: Params) -> Result<Self, ApiError> {
        params
            .map(|Query(m)| Self(m))
            .map_err(|e| ApiError::bad_request(e.body_text()))
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn required(&self, key: &str) -> Result<&str, ApiError> {
        match self.str(key) {
            Some(v) if !v.trim().is_empty() => Ok(v),
            _ => Err(ApiError::bad_request(format!("missing parameter `{key}`"))),
        }
    }

    fn usize_or(&self, key: &str, default: usize, range: std::ops::RangeInclusive<usize>) -> Result<usize, ApiError> {
        let Some(raw) = self.str(key) else { return Ok(default) };
        raw.parse::<usize>()
            .ok()
            .filter(|v| range.contains(v))
            .ok_or_else(|| {
                ApiError::bad_request(format!(
                    "`{key}` must be an integer in {}..={}",
                    range.start(),
                    range.end()
                ))
            })
    }

    fn list<T>(&self, key: &str) -> Result<Option<std::collections::BTreeSet<T>>, ApiError>
    where
        T: std::str::FromStr + Ord,
        T::Err: std::fmt::Display,
    {
        let Some(raw) = self.str(key) else { return Ok(None) };
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<T>().map_err(|e| ApiError::bad_request(format!("`{key}`: {e}"))))
            .collect::<Result<_, _>>()
            .map(Some)
    }
}

// ── handlers ─────────────────────────────────────────────────────────────────

async fn get_stats(State(s): State<Arc<AppState>>) -> ApiResult {
    s.stats
        .as_ref()
        .map(ok)
        .ok_or_else(|| ApiError::unavailable("graph has fewer than two nodes"))
}

async fn get_ontology() -> Response {
    ok(ontology::schema())
}

#[derive(Serialize)]
struct NodeDetail<'a> {
    node: &'a Node,
    edges: Vec<PayloadEdge>,
}

async fn get_node(State(s): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult {
    let g = s.graph();
    let i = g.index_of(&id).ok_or_else(|| ApiError::not_found(format!("unknown node `{id}`")))?;
    let edges = g
        .incident_edges(i)
        .map(|e| PayloadEdge { src: e.src.clone(), dst: e.dst.clone(), relation: e.relation, weight: e.weight })
        .collect();
    Ok(ok(NodeDetail { node: g.node_at(i), edges }))
}

#[derive(Serialize)]
struct SearchPage {
    query: String,
    mode: QueryMode,
    total: usize,
    offset: usize,
    limit: usize,
    hits: Vec<Hit>,
}

async fn get_search(State(s): State<Arc<AppState>>, params: Params) -> ApiResult {
    let p = QueryParams::from(params)?;
    let q = p.str("q").unwrap_or_default();
    if q.trim().is_empty() {
        return Err(ApiError::bad_request("empty query"));
    }
    let mode: QueryMode = match p.str("mode") {
        Some(m) => m.parse()?,
        None => QueryMode::Auto,
    };
    let k = p.usize_or("k", 10, 1..=MAX_K)?;
    let offset = p.usize_or("offset", 0, 0..=MAX_K)?;
    let limit = p.usize_or("limit", k, 1..=MAX_K)?;
    let list = s.engine.search(q, mode, k)?;
    let total = list.hits.len();
    let hits = list.hits.into_iter().skip(offset).take(limit).collect();
    Ok(ok(SearchPage { query: q.to_string(), mode, total, offset, limit, hits }))
}

async fn get_subgraph(State(s): State<Arc<AppState>>, params: Params) -> ApiResult {
    let p = QueryParams::from(params)?;
    let seeds: Vec<String> = p
        .required("seed")?
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect();
    let depth = p.usize_or("depth", 1, 0..=MAX_DEPTH)?;
    let filters = Filters { layers: p.list::<Layer>("layers")?, relations: p.list::<RelationType>("relations")? };
    let sub = bfs_subgraph(s.graph(), &seeds, depth, &filters)?;
    Ok(ok(sub.payload()))
}

async fn get_concepts(State(s): State<Arc<AppState>>) -> Response {
    let concepts: Vec<&Node> = s.graph().nodes_of(EntityClass::PhilosophicalConcept).collect();
    ok(concepts)
}

async fn get_concept_pair(State(s): State<Arc<AppState>>, params: Params) -> ApiResult {
    let p = QueryParams::from(params)?;
    let (a, b) = (p.required("a")?, p.required("b")?);
    let depth = p.usize_or("depth", 1, 0..=MAX_DEPTH)?;
    let sub = s.engine.concept_pair(a, b, depth)?;
    let payload: SubgraphPayload = sub.payload();
    Ok(ok(payload))
}
