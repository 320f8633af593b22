use super::{Method, RankedList, Result, RetrievalError};
use crate::embedding::{cosine, EmbedMode, EmbeddingProvider, EmbeddingVector};
use crate::graph::Graph;
use crate::ontology::EntityClass;

/// Passage vectors keyed by document id. Degenerate vectors are dropped.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingStore {
    entries: Vec<(String, EmbeddingVector)>,
}

impl EmbeddingStore {
    pub fn new(entries: Vec<(String, EmbeddingVector)>) -> Self {
        Self {
            entries: entries.into_iter().filter(|(_, v)| !v.is_degenerate()).collect(),
        }
    }

    pub fn from_texts<'t>(
        docs: impl IntoIterator<Item = (&'t str, &'t str)>,
        embedder: &dyn EmbeddingProvider,
    ) -> Result<Self> {
        let mut entries = Vec::new();
        for (id, text) in docs {
            entries.push((id.to_string(), embedder.embed(text, EmbedMode::Passage)?));
        }
        Ok(Self::new(entries))
    }

    /// Stored EMBEDDING vectors keyed by their source node id.
    pub fn from_graph(graph: &Graph) -> Self {
        let entries = graph
            .nodes_of(EntityClass::Embedding)
            .filter_map(|n| {
                let src = n.attr_str("source")?;
                let values: Vec<f64> = n
                    .attrs
                    .get("vector")?
                    .as_array()?
                    .iter()
                    .filter_map(|v| v.as_f64())
                    .collect();
                if n.attrs.get("degenerate").and_then(|v| v.as_bool()) == Some(true) {
                    return None;
                }
                Some((src.to_string(), EmbeddingVector::from_raw(values)?))
            })
            .collect();
        Self::new(entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Exact top-`k` by cosine against the query embedded in query mode.
    pub fn search(&self, query: &str, embedder: &dyn EmbeddingProvider, k: usize) -> Result<RankedList> {
        if self.entries.is_empty() {
            return Err(RetrievalError::NoEmbeddings);
        }
        let q = embedder.embed(query, EmbedMode::Query)?;
        self.search_vector(query, &q, k)
    }

    pub fn search_vector(&self, query: &str, q: &EmbeddingVector, k: usize) -> Result<RankedList> {
        if self.entries.is_empty() {
            return Err(RetrievalError::NoEmbeddings);
        }
        let mut scored = Vec::with_capacity(self.entries.len());
        for (id, v) in &self.entries {
            scored.push((id.clone(), cosine(q, v)?));
        }
        Ok(RankedList::from_scores(query, Method::Semantic, scored, k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::HashEmbedder;

    #[test]
    fn shared_tokens_rank_first() {
        let e = HashEmbedder::default();
        let docs = [
            ("target", "đạo hiếu của người con"),
            ("d1", "thị trường chứng khoán"),
            ("d2", "điện thoại thông minh"),
        ];
        let store = EmbeddingStore::from_texts(docs, &e).unwrap();
        let r = store.search("đạo hiếu của người con", &e, 10).unwrap();
        assert_eq!(r.hits[0].doc_id, "target");
        assert_eq!(r.hits.len(), 3);
        assert!(store.search("x", &e, 0).unwrap().hits.is_empty());
        assert!(matches!(
            EmbeddingStore::default().search("x", &e, 3),
            Err(RetrievalError::NoEmbeddings)
        ));
    }
}
