//! Seeded synthetic corpora for the retrieval and chunking comparisons.
//!
//! Words are made-up Vietnamese-like syllables, so nothing depends on a
//! real corpus and every run with the same seed yields the same texts.

use std::collections::{BTreeSet, HashSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chunking::{chunk_document, fixed_chunk, Chunk, ChunkError, ChunkParams};
use crate::embedding::EmbeddingProvider;
use crate::retrieval::{ndcg_at_k, recall_at_k, BenchmarkQuery, EmbeddingStore, RetrievalError};

pub const BENCHMARK_SEED: u64 = 20_240_901;

/// Hash width used for the bundled benchmarks. At 256 buckets, unrelated
/// focus words collide with query buckets often enough to tie real hits.
pub const BENCHMARK_DIM: usize = 1024;

pub fn benchmark_embedder() -> crate::embedding::HashEmbedder {
    crate::embedding::HashEmbedder::new(BENCHMARK_DIM, crate::embedding::DEFAULT_SEED).expect("valid dimension")
}

const ONSETS: &[&str] = &[
    "b", "c", "ch", "d", "đ", "g", "gi", "h", "kh", "l", "m", "n", "ng", "nh", "ph", "qu", "s", "t", "th", "tr", "v",
    "x",
];
const RIMES: &[&str] = &[
    "a", "à", "ác", "ai", "an", "ang", "ánh", "ao", "âm", "ân", "ất", "e", "em", "ên", "iêu", "inh", "o", "oa",
    "ong", "ôi", "ơn", "u", "ung", "ương", "uyên", "ư", "ức",
];

/// Unique two-syllable words.
struct WordGen {
    rng: ChaCha8Rng,
    used: HashSet<String>,
}

impl WordGen {
    fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), used: HashSet::new() }
    }

    fn word(&mut self) -> String {
        loop {
            let mut w = String::new();
            for _ in 0..2 {
                w.push_str(ONSETS[self.rng.random_range(0..ONSETS.len())]);
                w.push_str(RIMES[self.rng.random_range(0..RIMES.len())]);
            }
            if self.used.insert(w.clone()) {
                return w;
            }
        }
    }

    fn words(&mut self, n: usize) -> Vec<String> {
        (0..n).map(|_| self.word()).collect()
    }
}

// ── Retrieval ────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalBenchmark {
    pub docs: Vec<(String, String)>,
    pub queries: Vec<BenchmarkQuery>,
}

/// Topics with a four-word concept vocabulary each.
///
/// Per topic the relevant set is one anchor passage holding every concept
/// word twice plus eleven short passages that dwell on a single concept
/// word. Twelve negatives are long modern-topic passages that mention each
/// concept word once in passing. The query is the four concept words, so the
/// anchor is the unique passage sharing all of them.
pub fn retrieval_benchmark(seed: u64, topics: usize) -> RetrievalBenchmark {
    let mut gen = WordGen::new(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5);
    let modern = gen.words(300);
    let mut docs = Vec::new();
    let mut queries = Vec::new();
    for t in 0..topics {
        let concepts = gen.words(4);
        let filler = gen.words(12);
        let mut relevant = Vec::new();

        let mut anchor: Vec<&str> = concepts.iter().chain(&concepts).map(String::as_str).collect();
        anchor.extend(filler.choose_multiple(&mut rng, 2).map(String::as_str));
        anchor.shuffle(&mut rng);
        let id = format!("rel-{t:02}-00");
        docs.push((id.clone(), anchor.join(" ")));
        relevant.push(id);

        for i in 1..12 {
            let focus = concepts[i % 4].as_str();
            let mut words: Vec<&str> = vec![focus; 5];
            words.extend(filler.choose_multiple(&mut rng, 5).map(String::as_str));
            words.shuffle(&mut rng);
            let id = format!("rel-{t:02}-{i:02}");
            docs.push((id.clone(), words.join(" ")));
            relevant.push(id);
        }
        for i in 0..12 {
            let mut words: Vec<&str> = concepts.iter().map(String::as_str).collect();
            words.extend(modern.choose_multiple(&mut rng, 36).map(String::as_str));
            words.shuffle(&mut rng);
            docs.push((format!("neg-{t:02}-{i:02}"), words.join(" ")));
        }
        queries.push(BenchmarkQuery { query: concepts.join(" "), relevant_doc_ids: relevant });
    }
    docs.sort();
    RetrievalBenchmark { docs, queries }
}

// ── Chunking ─────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub id: String,
    pub doc: usize,
    pub topic: usize,
    /// Byte range within the document text.
    pub range: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkingBenchmark {
    pub documents: Vec<(String, String)>,
    pub segments: Vec<Segment>,
    /// `(query, topic)`
    pub queries: Vec<(String, usize)>,
}

/// Long commentaries made of topic segments. Each segment is a run of
/// sentences drawn from one topic vocabulary; topics never repeat inside a
/// document and each topic occurs the same number of times overall.
pub fn chunking_benchmark(seed: u64) -> ChunkingBenchmark {
    const DOCS: usize = 12;
    const SEGS: usize = 10;
    const TOPICS: usize = 24;
    let mut gen = WordGen::new(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5A5A);
    let generic = gen.words(20);
    let vocab: Vec<Vec<String>> = (0..TOPICS).map(|_| gen.words(8)).collect();

    let mut documents = Vec::new();
    let mut segments = Vec::new();
    for d in 0..DOCS {
        let mut topics: Vec<usize> = (0..SEGS).map(|s| (d * SEGS + s) % TOPICS).collect();
        topics.shuffle(&mut rng);
        let mut text = String::new();
        for (s, &t) in topics.iter().enumerate() {
            if !text.is_empty() {
                text.push(' ');
            }
            let start = text.len();
            let n_sent = rng.random_range(6..=8);
            for k in 0..n_sent {
                let n_words = rng.random_range(10..=14);
                let mut words: Vec<&str> = (0..n_words)
                    .map(|_| vocab[t][rng.random_range(0..vocab[t].len())].as_str())
                    .collect();
                words.push(generic[rng.random_range(0..generic.len())].as_str());
                words.shuffle(&mut rng);
                if k > 0 {
                    text.push(' ');
                }
                text.push_str(&words.join(" "));
                text.push('.');
            }
            segments.push(Segment {
                id: format!("doc{d:02}-seg{s:02}"),
                doc: d,
                topic: t,
                range: [start, text.len()],
            });
        }
        documents.push((format!("doc{d:02}"), text));
    }
    let mut queries = Vec::new();
    for (t, words) in vocab.iter().enumerate() {
        for q in 0..2 {
            let picked: Vec<&str> = words[q * 4..q * 4 + 4].iter().map(String::as_str).collect();
            queries.push((picked.join(" "), t));
        }
    }
    ChunkingBenchmark { documents, segments, queries }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChunkingScore {
    pub recall_at_5: f64,
    pub ndcg_at_5: f64,
    pub chunk_count: usize,
    pub fallbacks: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChunkingComparison {
    pub adaptive: ChunkingScore,
    pub fixed: ChunkingScore,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchmarkError {
    #[error(transparent)]
    Chunk(#[from] ChunkError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
}

/// Fraction of a segment's bytes that a chunk's text covers. Chunk texts are
/// contiguous substrings of a single-spaced document.
fn covered(doc: &str, chunk: &Chunk, seg: &Segment) -> f64 {
    let Some(start) = doc.find(chunk.text.as_str()) else { return 0.0 };
    let end = start + chunk.text.len();
    let lo = start.max(seg.range[0]);
    let hi = end.min(seg.range[1]);
    hi.saturating_sub(lo) as f64 / (seg.range[1] - seg.range[0]) as f64
}

fn score_chunks(
    bench: &ChunkingBenchmark,
    chunks: &[(usize, Chunk)],
    embedder: &dyn EmbeddingProvider,
    min_cover: f64,
) -> Result<(f64, f64), BenchmarkError> {
    let ids: Vec<String> = (0..chunks.len()).map(|i| format!("chunk{i:05}")).collect();
    let store = EmbeddingStore::from_texts(
        ids.iter().zip(chunks).map(|(id, (_, c))| (id.as_str(), c.text.as_str())),
        embedder,
    )?;
    let (mut recall, mut ndcg) = (0.0, 0.0);
    for (q, topic) in &bench.queries {
        let relevant: BTreeSet<String> = bench
            .segments
            .iter()
            .filter(|s| s.topic == *topic)
            .map(|s| s.id.clone())
            .collect();
        let ranked = store.search(q, embedder, 5)?;
        let mut counted = BTreeSet::new();
        let labels: Vec<String> = ranked
            .hits
            .iter()
            .map(|h| {
                let idx: usize = h.doc_id[5..].parse().expect("chunk id");
                let (doc, chunk) = &chunks[idx];
                let text = &bench.documents[*doc].1;
                bench
                    .segments
                    .iter()
                    .filter(|s| s.doc == *doc && relevant.contains(&s.id) && !counted.contains(&s.id))
                    .find(|s| covered(text, chunk, s) >= min_cover)
                    .map(|s| {
                        counted.insert(s.id.clone());
                        s.id.clone()
                    })
                    .unwrap_or_else(|| h.doc_id.clone())
            })
            .collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        recall += recall_at_k(&refs, &relevant, 5)?;
        ndcg += ndcg_at_k(&refs, &relevant, 5)?;
    }
    let n = bench.queries.len() as f64;
    Ok((recall / n, ndcg / n))
}

/// Adaptive chunking with `params` against fixed windows of
/// `params.max_tokens` tokens without overlap. A chunk counts as retrieving
/// a segment when it covers at least 80% of it.
pub fn evaluate_chunking(
    bench: &ChunkingBenchmark,
    embedder: &dyn EmbeddingProvider,
    params: &ChunkParams,
) -> Result<ChunkingComparison, BenchmarkError> {
    let mut adaptive = Vec::new();
    let mut fixed = Vec::new();
    let mut fallbacks = 0;
    for (d, (id, text)) in bench.documents.iter().enumerate() {
        let out = chunk_document(id, text, embedder, params)?;
        fallbacks += usize::from(out.fell_back);
        adaptive.extend(out.chunks.into_iter().map(|c| (d, c)));
        fixed.extend(fixed_chunk(id, text, params.max_tokens, 0)?.into_iter().map(|c| (d, c)));
    }
    let (ar, an) = score_chunks(bench, &adaptive, embedder, 0.8)?;
    let (fr, fnd) = score_chunks(bench, &fixed, embedder, 0.8)?;
    Ok(ChunkingComparison {
        adaptive: ChunkingScore { recall_at_5: ar, ndcg_at_5: an, chunk_count: adaptive.len(), fallbacks },
        fixed: ChunkingScore { recall_at_5: fr, ndcg_at_5: fnd, chunk_count: fixed.len(), fallbacks: 0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_seeded() {
        assert_eq!(retrieval_benchmark(1, 3), retrieval_benchmark(1, 3));
        assert_ne!(retrieval_benchmark(1, 3), retrieval_benchmark(2, 3));
        let b = chunking_benchmark(1);
        assert_eq!(b.documents.len(), 12);
        assert_eq!(b.segments.len(), 120);
        for t in 0..24 {
            assert_eq!(b.segments.iter().filter(|s| s.topic == t).count(), 5);
        }
        for s in &b.segments {
            assert!(s.range[1] - s.range[0] > 256, "segment shorter than the split floor");
        }
    }
}
