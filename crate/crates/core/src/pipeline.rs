//! Corpus to graph in the fixed layer order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chunking::{chunk_document, ChunkError, ChunkParams};
use crate::corpus::Corpus;
use crate::embedding::EmbeddingProvider;
use crate::extraction::{ConceptDef, SpeakerPattern};
use crate::graph::{BuildConfig, Graph, GraphBuilder, GraphDelta, GraphError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Chunk(#[from] ChunkError),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub graph: BuildConfig,
    pub chunking: ChunkParams,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    /// Per-layer additions, keyed by layer step name.
    pub steps: BTreeMap<String, GraphDelta>,
    pub chunk_count: usize,
    /// Commentaries that fell back to fixed-size chunks.
    pub fallbacks: Vec<String>,
}

pub fn build_graph(
    corpus: &Corpus,
    config: &PipelineConfig,
    taxonomy: &[ConceptDef],
    speakers: &[SpeakerPattern],
    embedder: &dyn EmbeddingProvider,
) -> Result<(Graph, BuildReport), PipelineError> {
    config.chunking.validate()?;
    let mut report = BuildReport::default();

    let mut chunks = BTreeMap::new();
    for c in &corpus.commentaries {
        match chunk_document(&c.commentary_id, &c.text, embedder, &config.chunking) {
            Ok(out) => {
                if out.fell_back {
                    report.fallbacks.push(c.commentary_id.clone());
                }
                report.chunk_count += out.chunks.len();
                chunks.insert(c.commentary_id.clone(), out.chunks);
            }
            Err(ChunkError::EmptyInput) => {}
            Err(e) => return Err(e.into()),
        }
    }

    let mut b = GraphBuilder::new(config.graph.clone(), embedder);
    let s = &corpus.sentences;
    report.steps.insert("1-textual".into(), b.build_textual(s)?);
    report
        .steps
        .insert("2-linguistic".into(), b.build_linguistic(s, &corpus.dictionary)?);
    report.steps.insert("3-conceptual".into(), b.build_conceptual(taxonomy, s)?);
    report
        .steps
        .insert("4-commentary".into(), b.build_commentary(&corpus.commentaries, &chunks, s)?);
    report.steps.insert("5-speaker".into(), b.build_speaker(s, speakers)?);
    report.steps.insert("6-semantic".into(), b.build_semantic()?);

    let mut graph = b.finish();
    graph.header.corpus_hash = corpus.content_hash();
    graph.header.config = serde_json::to_value(config).expect("config serializes");
    Ok((graph, report))
}

/// The small tri-parallel corpus bundled with the crate sources.
pub const MINI_CORPUS_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/mini");
