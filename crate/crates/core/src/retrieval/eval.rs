use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::{
    mrr, ndcg_at_k, precision_at_k, recall_at_k, rrf_fuse, Bm25Index, Bm25Params, EmbeddingStore, Method,
    RankedList, Result, RetrievalError,
};
use crate::embedding::EmbeddingProvider;
use crate::graph::{embedding_text, Graph};
use crate::ontology::EntityClass;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkQuery {
    pub query: String,
    pub relevant_doc_ids: Vec<String>,
}

/// One `{query, relevant_doc_ids}` object per line.
pub fn parse_benchmark<R: BufRead>(input: R) -> Result<Vec<BenchmarkQuery>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let q: BenchmarkQuery = serde_json::from_str(&line).map_err(|e| RetrievalError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(q);
    }
    Ok(out)
}

/// `(source node id, text)` for every embedded node of a graph, the
/// document set that both BM25 and semantic search run over.
pub fn graph_documents(graph: &Graph) -> Vec<(String, String)> {
    let mut docs: Vec<(String, String)> = graph
        .nodes_of(EntityClass::Embedding)
        .filter_map(|e| e.attr_str("source"))
        .filter_map(|src| graph.node(src))
        .map(|n| (n.id.clone(), embedding_text(n)))
        .collect();
    docs.sort();
    docs
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: Method,
    /// Precision keyed by cutoff.
    pub precision: BTreeMap<usize, f64>,
    pub mrr: f64,
    pub ndcg_at_5: f64,
    pub ndcg_at_10: f64,
    pub recall_at_5: f64,
}

impl MethodReport {
    pub fn p(&self, k: usize) -> Option<f64> {
        self.precision.get(&k).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub query_count: usize,
    pub doc_count: usize,
    pub methods: Vec<MethodReport>,
}

impl EvalReport {
    pub fn method(&self, m: Method) -> Option<&MethodReport> {
        self.methods.iter().find(|r| r.method == m)
    }

    pub fn render_table(&self) -> String {
        use std::fmt::Write;
        let ks: Vec<usize> = self
            .methods
            .first()
            .map(|m| m.precision.keys().copied().collect())
            .unwrap_or_default();
        let mut s = String::new();
        let _ = write!(s, "{:<10}", "method");
        for k in &ks {
            let _ = write!(s, " {:>8}", format!("P@{k}"));
        }
        let _ = writeln!(s, " {:>8} {:>8} {:>8} {:>9}", "MRR", "NDCG@5", "NDCG@10", "Recall@5");
        for m in &self.methods {
            let _ = write!(s, "{:<10}", m.method.as_str());
            for k in &ks {
                let _ = write!(s, " {:>8.3}", m.precision[k]);
            }
            let _ = writeln!(
                s,
                " {:>8.3} {:>8.3} {:>8.3} {:>9.3}",
                m.mrr, m.ndcg_at_5, m.ndcg_at_10, m.recall_at_5
            );
        }
        let _ = writeln!(s, "({} queries over {} documents)", self.query_count, self.doc_count);
        s
    }
}

/// Average per-method metrics over the query set. Hybrid fuses the BM25 and
/// semantic lists with reciprocal rank fusion.
pub fn run_benchmark(
    docs: &[(String, String)],
    queries: &[BenchmarkQuery],
    methods: &[Method],
    ks: &[usize],
    embedder: &dyn EmbeddingProvider,
    bm25: Bm25Params,
    k_rrf: usize,
) -> Result<EvalReport> {
    if queries.is_empty() {
        return Err(RetrievalError::EmptyQuerySet);
    }
    if ks.contains(&0) {
        return Err(RetrievalError::InvalidK);
    }
    let index = Bm25Index::build(docs.iter().map(|(i, t)| (i.as_str(), t.as_str())), bm25)?;
    let store = EmbeddingStore::from_texts(docs.iter().map(|(i, t)| (i.as_str(), t.as_str())), embedder)?;
    let depth = ks.iter().copied().max().unwrap_or(10).max(10);
    let pool = depth.max(100);

    let mut sums: BTreeMap<Method, MethodReport> = methods
        .iter()
        .map(|&m| {
            (
                m,
                MethodReport {
                    method: m,
                    precision: ks.iter().map(|&k| (k, 0.0)).collect(),
                    mrr: 0.0,
                    ndcg_at_5: 0.0,
                    ndcg_at_10: 0.0,
                    recall_at_5: 0.0,
                },
            )
        })
        .collect();

    for q in queries {
        let relevant: BTreeSet<String> = q.relevant_doc_ids.iter().cloned().collect();
        let lexical = index.search(&q.query, pool);
        let semantic = store.search(&q.query, embedder, pool)?;
        for (&m, acc) in sums.iter_mut() {
            let list: RankedList = match m {
                Method::Bm25 => lexical.clone(),
                Method::Semantic => semantic.clone(),
                Method::Hybrid => rrf_fuse(&[lexical.clone(), semantic.clone()], k_rrf),
            };
            let ids = list.ids();
            for (&k, p) in acc.precision.iter_mut() {
                *p += precision_at_k(&ids, &relevant, k)?;
            }
            acc.mrr += mrr(&ids, &relevant);
            acc.ndcg_at_5 += ndcg_at_k(&ids, &relevant, 5)?;
            acc.ndcg_at_10 += ndcg_at_k(&ids, &relevant, 10)?;
            acc.recall_at_5 += recall_at_k(&ids, &relevant, 5)?;
        }
    }

    let n = queries.len() as f64;
    let methods_out = methods
        .iter()
        .map(|m| {
            let mut r = sums[m].clone();
            r.precision.values_mut().for_each(|p| *p /= n);
            r.mrr /= n;
            r.ndcg_at_5 /= n;
            r.ndcg_at_10 /= n;
            r.recall_at_5 /= n;
            r
        })
        .collect();
    Ok(EvalReport {
        query_count: queries.len(),
        doc_count: docs.len(),
        methods: methods_out,
    })
}
