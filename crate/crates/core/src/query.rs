//! Exact, semantic and hybrid seeding followed by depth-limited BFS.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::corpus::normalize_text;
use crate::embedding::EmbeddingProvider;
use crate::graph::{node_id, Edge, Graph, Node};
use crate::ontology::{EntityClass, Layer, RelationType};
use crate::retrieval::{graph_documents, rrf_fuse, Bm25Index, Bm25Params, EmbeddingStore, RankedList, RetrievalError, DEFAULT_K_RRF};

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("unknown seed node `{0}`")]
    UnknownSeed(String),
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
    #[error("empty query")]
    EmptyQuery,
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
}

pub type Result<T, E = QueryError> = std::result::Result<T, E>;

/// Classes searched by exact matching.
pub const EXACT_CLASSES: [EntityClass; 5] = [
    EntityClass::HanSentence,
    EntityClass::HanvietSentence,
    EntityClass::VietnameseSentence,
    EntityClass::CommentaryChunk,
    EntityClass::HanWord,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryMode {
    /// Exact seeds when the text matches verbatim, semantic otherwise.
    #[default]
    Auto,
    Exact,
    Semantic,
    Hybrid,
}

impl std::str::FromStr for QueryMode {
    type Err = QueryError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(QueryMode::Auto),
            "exact" => Ok(QueryMode::Exact),
            "semantic" => Ok(QueryMode::Semantic),
            "hybrid" => Ok(QueryMode::Hybrid),
            other => Err(QueryError::InvalidRequest(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Filters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<BTreeSet<Layer>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relations: Option<BTreeSet<RelationType>>,
}

impl Filters {
    fn allows(&self, relation: RelationType, target: Layer) -> bool {
        self.relations.as_ref().is_none_or(|r| r.contains(&relation))
            && self.layers.as_ref().is_none_or(|l| l.contains(&target))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRequest {
    pub text: String,
    #[serde(default)]
    pub mode: QueryMode,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_max_seeds")]
    pub max_seeds: usize,
    #[serde(default)]
    pub filters: Filters,
}

fn default_depth() -> usize {
    1
}

fn default_max_seeds() -> usize {
    10
}

impl QueryRequest {
    pub fn new(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            mode: QueryMode::Auto,
            depth: 1,
            max_seeds: 10,
            filters: Filters::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Subgraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub seeds: Vec<String>,
}

/// Wire shape of an edge in subgraph payloads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayloadEdge {
    pub src: String,
    pub dst: String,
    pub relation: RelationType,
    pub weight: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgraphPayload {
    pub nodes: Vec<Node>,
    pub edges: Vec<PayloadEdge>,
    pub seeds: Vec<String>,
}

impl Subgraph {
    pub fn node_ids(&self) -> Vec<&str> {
        self.nodes.iter().map(|n| n.id.as_str()).collect()
    }

    pub fn payload(&self) -> SubgraphPayload {
        SubgraphPayload {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| PayloadEdge {
                    src: e.src.clone(),
                    dst: e.dst.clone(),
                    relation: e.relation,
                    weight: e.weight,
                })
                .collect(),
            seeds: self.seeds.clone(),
        }
    }

    /// Plain-text listing for terminals.
    pub fn render_table(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "seeds: {}", self.seeds.join(", "));
        let _ = writeln!(s, "{} nodes, {} edges", self.nodes.len(), self.edges.len());
        for n in &self.nodes {
            let text = n.primary_text().or_else(|| n.attr_str("han")).unwrap_or("");
            let short: String = text.chars().take(60).collect();
            let _ = writeln!(s, "  {:<24} {:<40} {}", n.entity_class.as_str(), n.id, short);
        }
        for e in &self.edges {
            match e.weight {
                Some(w) => {
                    let _ = writeln!(s, "  {} -[{} {:.3}]-> {}", e.src, e.relation, w, e.dst);
                }
                None => {
                    let _ = writeln!(s, "  {} -[{}]-> {}", e.src, e.relation, e.dst);
                }
            }
        }
        s
    }
}

/// Ids of searchable nodes whose text contains the normalized query.
pub fn exact_match(graph: &Graph, text: &str) -> Vec<String> {
    let needle = normalize_text(text);
    if needle.is_empty() {
        return Vec::new();
    }
    let mut ids: Vec<String> = graph
        .nodes()
        .iter()
        .filter(|n| EXACT_CLASSES.contains(&n.entity_class))
        .filter(|n| n.primary_text().is_some_and(|t| t.contains(&needle)))
        .map(|n| n.id.clone())
        .collect();
    ids.sort();
    ids
}

/// Nodes within `depth` undirected hops of any seed, expanding only along
/// edges and into layers allowed by `filters`. Returned edges are the
/// induced set. Node order is BFS level, then id.
pub fn bfs_subgraph(graph: &Graph, seeds: &[String], depth: usize, filters: &Filters) -> Result<Subgraph> {
    let mut visited: HashSet<usize> = HashSet::new();
    let mut frontier: Vec<usize> = Vec::new();
    for s in seeds {
        let i = graph.index_of(s).ok_or_else(|| QueryError::UnknownSeed(s.clone()))?;
        if visited.insert(i) {
            frontier.push(i);
        }
    }
    let by_id = |v: &mut Vec<usize>| v.sort_by(|a, b| graph.node_at(*a).id.cmp(&graph.node_at(*b).id));
    by_id(&mut frontier);
    let mut order = frontier.clone();
    for _ in 0..depth {
        let mut next = Vec::new();
        for &u in &frontier {
            for (edge, v) in graph.neighbours(u) {
                if filters.allows(edge.relation, graph.node_at(v).layer) && visited.insert(v) {
                    next.push(v);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        by_id(&mut next);
        order.extend_from_slice(&next);
        frontier = next;
    }

    let mut edge_idx: Vec<usize> = order
        .iter()
        .flat_map(|&u| graph.incident_indices(u).iter().copied())
        .filter(|&e| {
            let edge = graph.edge_at(e);
            let s = graph.index_of(&edge.src).expect("edge endpoint");
            let d = graph.index_of(&edge.dst).expect("edge endpoint");
            visited.contains(&s) && visited.contains(&d)
        })
        .collect();
    edge_idx.sort_unstable();
    edge_idx.dedup();

    let mut seed_ids: Vec<String> = Vec::new();
    for s in seeds {
        if !seed_ids.contains(s) {
            seed_ids.push(s.clone());
        }
    }
    Ok(Subgraph {
        nodes: order.iter().map(|&i| graph.node_at(i).clone()).collect(),
        edges: edge_idx.into_iter().map(|e| graph.edge_at(e).clone()).collect(),
        seeds: seed_ids,
    })
}

/// Result of a routed query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub mode: QueryMode,
    pub subgraph: Subgraph,
}

/// Read-only query front end over a loaded graph.
pub struct QueryEngine {
    graph: Graph,
    store: EmbeddingStore,
    bm25: Option<Bm25Index>,
    embedder: Box<dyn EmbeddingProvider>,
}

impl QueryEngine {
    pub fn new(graph: Graph, embedder: Box<dyn EmbeddingProvider>) -> Self {
        let store = EmbeddingStore::from_graph(&graph);
        let bm25 = Bm25Index::build(graph_documents(&graph), Bm25Params::default()).ok();
        Self { graph, store, bm25, embedder }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn embedder(&self) -> &dyn EmbeddingProvider {
        self.embedder.as_ref()
    }

    /// Source node ids of the `max_seeds` nearest stored embeddings.
    pub fn semantic_seeds(&self, text: &str, max_seeds: usize) -> Result<Vec<String>> {
        let r = self.store.search(text, self.embedder.as_ref(), max_seeds)?;
        Ok(r.hits.into_iter().map(|h| h.doc_id).collect())
    }

    /// Ranked search. Exact hits score 1.0 in id order; hybrid fuses BM25 and
    /// semantic rankings.
    pub fn search(&self, text: &str, mode: QueryMode, k: usize) -> Result<RankedList> {
        if normalize_text(text).is_empty() {
            return Err(QueryError::EmptyQuery);
        }
        let semantic = |k| self.store.search(text, self.embedder.as_ref(), k);
        let list = match mode {
            QueryMode::Exact => exact_list(&self.graph, text, k),
            QueryMode::Semantic => semantic(k)?,
            QueryMode::Auto => {
                let exact = exact_list(&self.graph, text, k);
                if exact.hits.is_empty() {
                    semantic(k)?
                } else {
                    exact
                }
            }
            QueryMode::Hybrid => {
                let pool = k.max(100);
                let lexical = self
                    .bm25
                    .as_ref()
                    .ok_or(RetrievalError::EmptyIndex)?
                    .search(text, pool);
                let mut fused = rrf_fuse(&[lexical, semantic(pool)?], DEFAULT_K_RRF);
                fused.hits.truncate(k);
                fused
            }
        };
        Ok(list)
    }

    pub fn run(&self, req: &QueryRequest) -> Result<QueryResult> {
        if normalize_text(&req.text).is_empty() {
            return Err(QueryError::EmptyQuery);
        }
        if req.max_seeds == 0 {
            return Err(QueryError::InvalidRequest("max_seeds must be >= 1".into()));
        }
        let exact = || {
            let mut v = exact_match(&self.graph, &req.text);
            v.truncate(req.max_seeds);
            v
        };
        let (mode, seeds) = match req.mode {
            QueryMode::Exact => (QueryMode::Exact, exact()),
            QueryMode::Semantic => (QueryMode::Semantic, self.semantic_seeds(&req.text, req.max_seeds)?),
            QueryMode::Auto => {
                let e = exact();
                if e.is_empty() {
                    (QueryMode::Semantic, self.semantic_seeds(&req.text, req.max_seeds)?)
                } else {
                    (QueryMode::Exact, e)
                }
            }
            QueryMode::Hybrid => {
                let mut s = exact();
                for id in self.semantic_seeds(&req.text, req.max_seeds)? {
                    if !s.contains(&id) {
                        s.push(id);
                    }
                }
                (QueryMode::Hybrid, s)
            }
        };
        let subgraph = bfs_subgraph(&self.graph, &seeds, req.depth, &req.filters)?;
        Ok(QueryResult { mode, subgraph })
    }

    pub fn concept_pair(&self, a: &str, b: &str, depth: usize) -> Result<Subgraph> {
        concept_pair_query(&self.graph, a, b, depth)
    }
}

fn exact_list(graph: &Graph, text: &str, k: usize) -> RankedList {
    RankedList {
        query: text.to_string(),
        method: crate::retrieval::Method::Bm25,
        hits: exact_match(graph, text)
            .into_iter()
            .take(k)
            .map(|doc_id| crate::retrieval::Hit { doc_id, score: 1.0 })
            .collect(),
    }
}

/// Resolve a concept given as a node id, a character or a Vietnamese
/// reading (first match in taxonomy order).
pub fn resolve_concept(graph: &Graph, key: &str) -> Result<String> {
    if graph.class_of(key) == Some(EntityClass::PhilosophicalConcept) {
        return Ok(key.to_string());
    }
    let id = node_id(EntityClass::PhilosophicalConcept, key);
    if graph.node(&id).is_some() {
        return Ok(id);
    }
    let lower = key.to_lowercase();
    graph
        .nodes_of(EntityClass::PhilosophicalConcept)
        .find(|n| {
            n.attrs
                .get("vietnamese")
                .and_then(Value::as_str)
                .is_some_and(|v| v.to_lowercase() == lower)
        })
        .map(|n| n.id.clone())
        .ok_or_else(|| QueryError::UnknownConcept(key.to_string()))
}

/// Union of the BFS neighbourhoods of two concepts, with every sentence
/// expressing either concept and all induced edges.
pub fn concept_pair_query(graph: &Graph, a: &str, b: &str, depth: usize) -> Result<Subgraph> {
    let ca = resolve_concept(graph, a)?;
    let cb = resolve_concept(graph, b)?;
    let mut seeds = vec![ca.clone()];
    if cb != ca {
        seeds.push(cb.clone());
    }
    let base = bfs_subgraph(graph, &seeds, depth, &Filters::default())?;
    let mut ids: Vec<String> = base.nodes.iter().map(|n| n.id.clone()).collect();
    let mut have: HashSet<String> = ids.iter().cloned().collect();
    for e in graph.edges_of(RelationType::ExpressesConcept) {
        if (e.dst == ca || e.dst == cb) && have.insert(e.src.clone()) {
            ids.push(e.src.clone());
        }
    }
    if ids.len() == base.nodes.len() {
        return Ok(base);
    }
    // Depth 0 over the widened set gives the induced edges.
    let mut sub = bfs_subgraph(graph, &ids, 0, &Filters::default())?;
    sub.seeds = seeds;
    Ok(sub)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Attrs;

    fn star() -> Graph {
        let mut g = Graph::new();
        g.add_node("PAGE:hub", EntityClass::Page, Attrs::new()).unwrap();
        for i in 0..5 {
            let id = format!("SENTENCE:{i}");
            g.add_node(id.clone(), EntityClass::Sentence, Attrs::new()).unwrap();
            g.add_edge(Edge::new("PAGE:hub", id, RelationType::Contains)).unwrap();
        }
        g.add_edge(Edge::new("SENTENCE:0", "SENTENCE:1", RelationType::Follows)).unwrap();
        g
    }

    #[test]
    fn bfs_star() {
        let g = star();
        let s = bfs_subgraph(&g, &["PAGE:hub".into()], 1, &Filters::default()).unwrap();
        assert_eq!(s.nodes.len(), 6);
        assert_eq!(s.edges.len(), 6);
        assert_eq!(s.node_ids()[0], "PAGE:hub");
        let s0 = bfs_subgraph(&g, &["SENTENCE:0".into(), "SENTENCE:1".into()], 0, &Filters::default()).unwrap();
        assert_eq!(s0.nodes.len(), 2);
        assert_eq!(s0.edges.len(), 1);
        assert!(matches!(
            bfs_subgraph(&g, &["nope".into()], 1, &Filters::default()),
            Err(QueryError::UnknownSeed(_))
        ));
        let only_follows = Filters {
            relations: Some([RelationType::Follows].into()),
            ..Filters::default()
        };
        let s = bfs_subgraph(&g, &["SENTENCE:0".into()], 2, &only_follows).unwrap();
        assert_eq!(s.node_ids(), ["SENTENCE:0", "SENTENCE:1"]);
    }

    #[test]
    fn exact_on_text() {
        let mut g = Graph::new();
        let mut a = Attrs::new();
        a.insert("text".into(), "曾子曰:吾日三省吾身".into());
        g.add_node("HAN_SENTENCE:x", EntityClass::HanSentence, a).unwrap();
        assert_eq!(exact_match(&g, "吾日三省"), ["HAN_SENTENCE:x"]);
        assert!(exact_match(&g, "禮").is_empty());
        assert!(exact_match(&g, "  ").is_empty());
    }
}
