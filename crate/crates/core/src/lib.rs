//! Tri-parallel classical text corpora to a six-layer knowledge graph.
//!
//! The pipeline runs in a fixed order:
//!
//! ```text
//! corpus (main text / dictionary / commentary)
//!   -> chunking + extraction + embedding
//!   -> graph (textual -> linguistic -> conceptual -> commentary -> speaker -> semantic)
//!   -> retrieval / query / stats
//! ```
//!
//! Every edge that enters a [`graph::Graph`] is checked against the
//! [`ontology`] endpoint table, so a built or loaded graph never carries a
//! schema violation.

pub mod benchmark;
pub mod chunking;
pub mod corpus;
pub mod embedding;
pub mod extraction;
pub mod graph;
pub mod ontology;
pub mod pipeline;
pub mod query;
pub mod retrieval;
pub mod text;

pub use corpus::{CommentaryRecord, CorpusId, DictEntry, SentenceRecord};
pub use embedding::{EmbeddingProvider, EmbeddingVector, EmbedMode};
pub use graph::{Edge, Graph, GraphStats, Node};
pub use ontology::{EntityClass, GenerationMethod, Layer, RelationType};
