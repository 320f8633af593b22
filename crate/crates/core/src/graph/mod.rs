//! Typed property graph constrained by the ontology.

mod build;
mod io;
mod stats;

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::ontology::{validate_edge, EntityClass, GenerationMethod, Layer, RelationType};

pub use build::{
    chapter_of, embedding_text, han_words, sentence_node_id, top_k_neighbours, BuildConfig, ContextScope, GraphBuilder,
    GraphDelta,
};
pub use io::{load, read_from, save, write_to, FORMAT_VERSION};
pub use stats::{density, stats, GraphStats, RelationShare};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("node `{id}` already exists with class {existing}")]
    DuplicateNode { id: String, existing: EntityClass },
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("schema violation: {relation} from {src} to {dst}")]
    SchemaViolation {
        relation: RelationType,
        src: EntityClass,
        dst: EntityClass,
    },
    #[error("node `{id}` has layer {found}, expected {expected}")]
    LayerMismatch { id: String, found: Layer, expected: Layer },
    #[error("{relation} edge weight presence does not match the schema")]
    WeightMismatch { relation: RelationType },
    #[error("graph file format version {found}, expected {expected}")]
    SchemaVersionMismatch { found: String, expected: u32 },
    #[error("serialization error: {0}")]
    Serialization(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("graph needs at least 2 nodes for density, has {0}")]
    EmptyGraph(usize),
    #[error(transparent)]
    Embed(#[from] crate::embedding::EmbedError),
    #[error(transparent)]
    Extract(#[from] crate::extraction::ExtractError),
}

pub type Result<T, E = GraphError> = std::result::Result<T, E>;

pub type Attrs = BTreeMap<String, Value>;

/// Namespaced node id `CLASS:key`.
pub fn node_id(class: EntityClass, key: &str) -> String {
    format!("{}:{}", class.as_str(), key)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    #[serde(rename = "class")]
    pub entity_class: EntityClass,
    pub layer: Layer,
    #[serde(default)]
    pub attrs: Attrs,
}

impl Node {
    pub fn attr_str(&self, key: &str) -> Option<&str> {
        self.attrs.get(key).and_then(Value::as_str)
    }

    /// The text that exact matching and embedding operate on.
    pub fn primary_text(&self) -> Option<&str> {
        self.attr_str("text")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub src: String,
    pub dst: String,
    pub relation: RelationType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    pub method: GenerationMethod,
    #[serde(default)]
    pub verified: bool,
}

impl Edge {
    pub fn new(src: impl Into<String>, dst: impl Into<String>, relation: RelationType) -> Self {
        Self {
            src: src.into(),
            dst: dst.into(),
            relation,
            weight: None,
            method: relation.method(),
            verified: false,
        }
    }

    pub fn weighted(mut self, w: f64) -> Self {
        self.weight = Some(w);
        self
    }
}

/// A single candidate edge queued for human review.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationItem {
    pub src: String,
    pub dst: String,
    pub relation: RelationType,
    pub weight: Option<f64>,
}

/// Provenance written as the first record of a graph file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphHeader {
    pub corpus_hash: String,
    pub embedder_id: String,
    pub seeds: BTreeMap<String, u64>,
    #[serde(default)]
    pub config: Value,
    #[serde(default)]
    pub verification_queue: Vec<VerificationItem>,
}

/// In-memory graph. Nodes and edges keep insertion order; every edge is
/// validated against the ontology on insert.
#[derive(Debug, Clone, Default)]
pub struct Graph {
    pub header: GraphHeader,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    index: HashMap<String, usize>,
    /// Per node: indices of incident edges (either direction).
    incident: Vec<Vec<usize>>,
    edge_keys: HashSet<(usize, usize, RelationType)>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn node_at(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub fn class_of(&self, id: &str) -> Option<EntityClass> {
        self.node(id).map(|n| n.entity_class)
    }

    pub fn nodes_of(&self, class: EntityClass) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(move |n| n.entity_class == class)
    }

    pub fn edges_of(&self, relation: RelationType) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.relation == relation)
    }

    /// Edges touching node index `i`, in insertion order.
    pub fn incident_edges(&self, i: usize) -> impl Iterator<Item = &Edge> {
        self.incident[i].iter().map(|&e| &self.edges[e])
    }

    pub fn edge_at(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    /// Indices of edges touching node index `i`.
    pub fn incident_indices(&self, i: usize) -> &[usize] {
        &self.incident[i]
    }

    /// `(edge, neighbour index)` pairs for node index `i`, ignoring direction.
    pub fn neighbours(&self, i: usize) -> impl Iterator<Item = (&Edge, usize)> {
        self.incident[i].iter().map(move |&e| {
            let edge = &self.edges[e];
            let other = if self.index[&edge.src] == i {
                self.index[&edge.dst]
            } else {
                self.index[&edge.src]
            };
            (edge, other)
        })
    }

    /// Add a node; returns `false` if a node with this id and class exists.
    pub fn add_node(&mut self, id: impl Into<String>, class: EntityClass, attrs: Attrs) -> Result<bool> {
        let id = id.into();
        if let Some(&i) = self.index.get(&id) {
            let existing = self.nodes[i].entity_class;
            if existing != class {
                return Err(GraphError::DuplicateNode { id, existing });
            }
            return Ok(false);
        }
        self.insert_node(Node {
            id,
            entity_class: class,
            layer: class.layer(),
            attrs,
        })?;
        Ok(true)
    }

    pub(crate) fn insert_node(&mut self, node: Node) -> Result<()> {
        if node.layer != node.entity_class.layer() {
            return Err(GraphError::LayerMismatch {
                id: node.id,
                found: node.layer,
                expected: node.entity_class.layer(),
            });
        }
        if let Some(&i) = self.index.get(&node.id) {
            return Err(GraphError::DuplicateNode {
                id: node.id,
                existing: self.nodes[i].entity_class,
            });
        }
        self.index.insert(node.id.clone(), self.nodes.len());
        self.nodes.push(node);
        self.incident.push(Vec::new());
        Ok(())
    }

    pub fn node_mut(&mut self, id: &str) -> Option<&mut Node> {
        self.index.get(id).map(|&i| &mut self.nodes[i])
    }

    /// Add a validated edge.
    pub fn add_edge(&mut self, edge: Edge) -> Result<()> {
        let s = *self
            .index
            .get(&edge.src)
            .ok_or_else(|| GraphError::UnknownNode(edge.src.clone()))?;
        let d = *self
            .index
            .get(&edge.dst)
            .ok_or_else(|| GraphError::UnknownNode(edge.dst.clone()))?;
        let (sc, dc) = (self.nodes[s].entity_class, self.nodes[d].entity_class);
        if !validate_edge(edge.relation, sc, dc) {
            return Err(GraphError::SchemaViolation {
                relation: edge.relation,
                src: sc,
                dst: dc,
            });
        }
        if edge.weight.is_some() != edge.relation.is_weighted() {
            return Err(GraphError::WeightMismatch { relation: edge.relation });
        }
        let e = self.edges.len();
        self.edge_keys.insert((s, d, edge.relation));
        self.incident[s].push(e);
        if d != s {
            self.incident[d].push(e);
        }
        self.edges.push(edge);
        Ok(())
    }

    /// Add the edge unless one with the same endpoints and relation exists.
    pub fn add_edge_once(&mut self, edge: Edge) -> Result<bool> {
        if self.has_edge(&edge.src, &edge.dst, edge.relation) {
            return Ok(false);
        }
        self.add_edge(edge)?;
        Ok(true)
    }

    pub fn has_edge(&self, src: &str, dst: &str, relation: RelationType) -> bool {
        match (self.index.get(src), self.index.get(dst)) {
            (Some(&s), Some(&d)) => self.edge_keys.contains(&(s, d, relation)),
            _ => false,
        }
    }

    /// Count of edges that fail ontology validation. Always zero for graphs
    /// assembled through [`Graph::add_edge`]; exposed for reports.
    pub fn schema_violations(&self) -> usize {
        self.edges
            .iter()
            .filter(|e| {
                match (self.class_of(&e.src), self.class_of(&e.dst)) {
                    (Some(s), Some(d)) => !validate_edge(e.relation, s, d),
                    _ => true,
                }
            })
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_and_validate() {
        let mut g = Graph::new();
        g.add_node("BOOK:LY", EntityClass::Book, Attrs::new()).unwrap();
        g.add_node("CHAPTER:LY.1", EntityClass::Chapter, Attrs::new()).unwrap();
        assert!(!g.add_node("BOOK:LY", EntityClass::Book, Attrs::new()).unwrap());
        assert!(matches!(
            g.add_node("BOOK:LY", EntityClass::Page, Attrs::new()),
            Err(GraphError::DuplicateNode { .. })
        ));
        g.add_edge(Edge::new("BOOK:LY", "CHAPTER:LY.1", RelationType::Contains)).unwrap();
        assert!(matches!(
            g.add_edge(Edge::new("CHAPTER:LY.1", "BOOK:LY", RelationType::Contains)),
            Err(GraphError::SchemaViolation { .. })
        ));
        assert!(matches!(
            g.add_edge(Edge::new("BOOK:LY", "CHAPTER:LY.1", RelationType::Contains).weighted(1.0)),
            Err(GraphError::WeightMismatch { .. })
        ));
        assert!(matches!(
            g.add_edge(Edge::new("BOOK:LY", "PAGE:x", RelationType::Contains)),
            Err(GraphError::UnknownNode(_))
        ));
        assert!(!g.add_edge_once(Edge::new("BOOK:LY", "CHAPTER:LY.1", RelationType::Contains)).unwrap());
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.schema_violations(), 0);
        let n: Vec<_> = g.neighbours(0).map(|(_, o)| g.node_at(o).id.clone()).collect();
        assert_eq!(n, ["CHAPTER:LY.1"]);
    }
}
