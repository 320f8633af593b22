use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{Method, RankedList, Result, RetrievalError};
use crate::chunking::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocIndexEntry {
    pub doc_id: String,
    pub tokens: Vec<String>,
    pub length: usize,
}

/// Lowercased tokens; case folding only affects the Latin-script layers.
pub fn index_tokens(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(str::to_lowercase).collect()
}

#[derive(Debug, Clone)]
pub struct Bm25Index {
    params: Bm25Params,
    docs: Vec<DocIndexEntry>,
    /// term -> (doc index, term frequency)
    postings: HashMap<String, Vec<(usize, u32)>>,
    avgdl: f64,
}

impl Bm25Index {
    pub fn build<I, S, T>(docs: I, params: Bm25Params) -> Result<Self>
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: AsRef<str>,
    {
        let mut entries = Vec::new();
        let mut postings: HashMap<String, Vec<(usize, u32)>> = HashMap::new();
        for (i, (id, text)) in docs.into_iter().enumerate() {
            let tokens = index_tokens(text.as_ref());
            let mut tf: HashMap<&str, u32> = HashMap::new();
            for t in &tokens {
                *tf.entry(t.as_str()).or_insert(0) += 1;
            }
            for (t, n) in tf {
                postings.entry(t.to_string()).or_default().push((i, n));
            }
            entries.push(DocIndexEntry {
                doc_id: id.into(),
                length: tokens.len(),
                tokens,
            });
        }
        if entries.is_empty() {
            return Err(RetrievalError::EmptyIndex);
        }
        let avgdl = entries.iter().map(|d| d.length).sum::<usize>() as f64 / entries.len() as f64;
        Ok(Self { params, docs: entries, postings, avgdl })
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn docs(&self) -> &[DocIndexEntry] {
        &self.docs
    }

    /// Non-negative IDF, `ln(1 + (N - n + 0.5) / (n + 0.5))`.
    pub fn idf(&self, term: &str) -> f64 {
        let n = self.postings.get(term).map_or(0, Vec::len) as f64;
        let total = self.docs.len() as f64;
        (1.0 + (total - n + 0.5) / (n + 0.5)).ln()
    }

    /// Top `k` documents; each distinct query term counts once. Documents
    /// sharing no term with the query are left out.
    pub fn search(&self, query: &str, k: usize) -> RankedList {
        let Bm25Params { k1, b } = self.params;
        let terms: BTreeSet<String> = index_tokens(query).into_iter().collect();
        let mut scores: HashMap<usize, f64> = HashMap::new();
        for t in &terms {
            let Some(post) = self.postings.get(t) else { continue };
            let idf = self.idf(t);
            for &(d, tf) in post {
                let tf = tf as f64;
                let dl = self.docs[d].length as f64;
                let s = idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * dl / self.avgdl));
                *scores.entry(d).or_insert(0.0) += s;
            }
        }
        RankedList::from_scores(
            query,
            Method::Bm25,
            scores
                .into_iter()
                .map(|(d, s)| (self.docs[d].doc_id.clone(), s))
                .collect(),
            k,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_scores() {
        let docs = [("d1", "nhân nghĩa lễ"), ("d2", "nhân nhân trí tín hiếu"), ("d3", "hiếu đễ")];
        let idx = Bm25Index::build(docs, Bm25Params::default()).unwrap();
        let r = idx.search("nhân", 5);
        // N = 3, n = 2, avgdl = 10/3
        let idf = (1.0f64 + (3.0 - 2.0 + 0.5) / 2.5).ln();
        let s = |tf: f64, dl: f64| idf * tf * 2.2 / (tf + 1.2 * (0.25 + 0.75 * dl / (10.0 / 3.0)));
        assert_eq!(r.ids(), ["d2", "d1"]);
        assert!((r.hits[0].score - s(2.0, 5.0)).abs() < 1e-9);
        assert!((r.hits[1].score - s(1.0, 3.0)).abs() < 1e-9);
    }

    #[test]
    fn edge_cases() {
        let idx = Bm25Index::build([("only", "仁者愛人")], Bm25Params::default()).unwrap();
        assert_eq!(idx.search("仁", 5).ids(), ["only"]);
        assert!(idx.search("禮", 5).hits.is_empty());
        let none: [(&str, &str); 0] = [];
        assert!(matches!(Bm25Index::build(none, Bm25Params::default()), Err(RetrievalError::EmptyIndex)));
    }
}
