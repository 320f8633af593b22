//! Lexical, semantic and rank-fused retrieval plus binary-relevance metrics.

mod bm25;
mod eval;
mod metrics;
mod semantic;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bm25::{Bm25Index, Bm25Params, DocIndexEntry};
pub use eval::{graph_documents, parse_benchmark, run_benchmark, BenchmarkQuery, EvalReport, MethodReport};
pub use metrics::{mrr, ndcg_at_k, precision_at_k, recall_at_k};
pub use semantic::EmbeddingStore;

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("index is empty")]
    EmptyIndex,
    #[error("no embeddings available")]
    NoEmbeddings,
    #[error("k must be positive")]
    InvalidK,
    #[error("benchmark has no queries")]
    EmptyQuerySet,
    #[error("malformed benchmark line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("unknown retrieval method `{0}`")]
    UnknownMethod(String),
    #[error(transparent)]
    Embed(#[from] crate::embedding::EmbedError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = RetrievalError> = std::result::Result<T, E>;

pub const DEFAULT_K_RRF: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "BM25")]
    Bm25,
    Semantic,
    Hybrid,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Bm25, Method::Semantic, Method::Hybrid];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Bm25 => "BM25",
            Method::Semantic => "Semantic",
            Method::Hybrid => "Hybrid",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = RetrievalError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bm25" => Ok(Method::Bm25),
            "semantic" => Ok(Method::Semantic),
            "hybrid" => Ok(Method::Hybrid),
            _ => Err(RetrievalError::UnknownMethod(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub doc_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub query: String,
    pub method: Method,
    pub hits: Vec<Hit>,
}

impl RankedList {
    /// Sort by score descending, doc id ascending, and keep the first `k`.
    pub(crate) fn from_scores(query: &str, method: Method, mut scored: Vec<(String, f64)>, k: usize) -> Self {
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        scored.truncate(k);
        Self {
            query: query.to_string(),
            method,
            hits: scored
                .into_iter()
                .map(|(doc_id, score)| Hit { doc_id, score })
                .collect(),
        }
    }

    pub fn ids(&self) -> Vec<&str> {
        self.hits.iter().map(|h| h.doc_id.as_str()).collect()
    }
}

/// Reciprocal rank fusion: `score(d) = sum 1 / (k_rrf + rank)`, ranks from 1.
pub fn rrf_fuse(lists: &[RankedList], k_rrf: usize) -> RankedList {
    let mut scores: BTreeMap<&str, f64> = BTreeMap::new();
    for list in lists {
        for (i, h) in list.hits.iter().enumerate() {
            *scores.entry(h.doc_id.as_str()).or_insert(0.0) += 1.0 / (k_rrf as f64 + (i + 1) as f64);
        }
    }
    let n = scores.len();
    let query = lists.first().map(|l| l.query.as_str()).unwrap_or_default();
    RankedList::from_scores(
        query,
        Method::Hybrid,
        scores.into_iter().map(|(d, s)| (d.to_string(), s)).collect(),
        n,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn list(ids: &[&str]) -> RankedList {
        RankedList {
            query: "q".into(),
            method: Method::Bm25,
            hits: ids
                .iter()
                .enumerate()
                .map(|(i, d)| Hit { doc_id: d.to_string(), score: 10.0 - i as f64 })
                .collect(),
        }
    }

    #[test]
    fn rrf_formula() {
        let f = rrf_fuse(&[list(&["a", "b"]), list(&["a", "c", "d"])], 60);
        assert_eq!(f.hits[0].doc_id, "a");
        assert_eq!(f.hits[0].score, 2.0 / 61.0);
        let d = f.hits.iter().find(|h| h.doc_id == "d").unwrap();
        assert_eq!(d.score, 1.0 / 63.0);
        // b and c tie on 1/62; doc id breaks the tie
        assert_eq!(f.ids(), ["a", "b", "c", "d"]);
    }

    #[test]
    fn method_names() {
        assert_eq!("bm25".parse::<Method>().unwrap(), Method::Bm25);
        assert!("dense".parse::<Method>().is_err());
    }
}
