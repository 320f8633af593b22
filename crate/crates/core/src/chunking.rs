//! Coherence-driven segmentation of long commentary text.
//!
//! Sentences are embedded in passage mode; the coherence of sentence `i` is
//! its mean cosine with the (at most `w`) sentences before it. A chunk closes
//! when coherence drops below `theta` (unless the chunk is still shorter than
//! `min_chars`) or when the next sentence would push it past `max_tokens`.
//! Size-forced splits carry the last `overlap` tokens forward as context.
//!
//! [`chunk_document`] wraps this with a coverage check and falls back to
//! fixed-length windows when the adaptive output loses text.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{cosine, EmbedError, EmbedMode, EmbeddingProvider, EmbeddingVector};
use crate::text::{is_cjk, is_terminal, join, push_joined};

#[derive(Debug, Error)]
pub enum ChunkError {
    #[error("no sentences to chunk")]
    EmptyInput,
    #[error("coherence is undefined at index {0}")]
    IndexError(usize),
    #[error("invalid chunk parameters: {0}")]
    InvalidParams(String),
    #[error("sentence {index} has {tokens} tokens, more than the chunk limit")]
    SentenceTooLong { index: usize, tokens: usize },
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

pub type Result<T, E = ChunkError> = std::result::Result<T, E>;

/// Split into tokens: each CJK character is a token, every maximal run of
/// other non-whitespace characters is a token.
pub fn tokenize(text: &str) -> Vec<&str> {
    let mut tokens = Vec::new();
    let mut run_start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() || is_cjk(c) {
            if let Some(s) = run_start.take() {
                tokens.push(&text[s..i]);
            }
            if is_cjk(c) {
                tokens.push(&text[i..i + c.len_utf8()]);
            }
        } else if run_start.is_none() {
            run_start = Some(i);
        }
    }
    if let Some(s) = run_start {
        tokens.push(&text[s..]);
    }
    tokens
}

/// Split on sentence-final punctuation followed by whitespace or end of
/// input. Delimiters stay with their sentence.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut iter = text.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        if !is_terminal(c) {
            continue;
        }
        let end = i + c.len_utf8();
        let at_break = match iter.peek() {
            None => true,
            Some(&(_, next)) => next.is_whitespace(),
        };
        if at_break {
            let s = text[start..end].trim();
            if !s.is_empty() {
                out.push(s.to_string());
            }
            start = end;
        }
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        out.push(tail.to_string());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChunkParams {
    pub window: usize,
    pub theta: f64,
    pub max_tokens: usize,
    pub overlap: usize,
    pub min_chars: usize,
    pub coverage_min: f64,
}

impl Default for ChunkParams {
    fn default() -> Self {
        Self {
            window: 3,
            theta: 0.3,
            max_tokens: 512,
            overlap: 100,
            min_chars: 256,
            coverage_min: 0.95,
        }
    }
}

impl ChunkParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(ChunkError::InvalidParams(m.to_string()));
        if self.window < 1 {
            return bad("window must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return bad("theta must lie in [0, 1]");
        }
        if self.max_tokens <= self.overlap {
            return bad("max_tokens must exceed overlap");
        }
        if !(self.coverage_min > 0.0 && self.coverage_min <= 1.0) {
            return bad("coverage_min must lie in (0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChunkMethod {
    Adaptive,
    FixedFallback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub source_id: String,
    /// Inclusive index range: sentence indices for adaptive chunks, token
    /// indices for fixed windows.
    pub span: [usize; 2],
    pub text: String,
    pub token_count: usize,
    pub method: ChunkMethod,
    /// Byte length of the carried-over context at the start of `text`.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub overlap_bytes: usize,
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

impl Chunk {
    /// Chunk text without carried-over context.
    pub fn body(&self) -> &str {
        self.text[self.overlap_bytes..].trim_start()
    }
}

/// Mean cosine between `embs[i]` and its (at most `w`) predecessors.
pub fn coherence(embs: &[EmbeddingVector], i: usize, w: usize) -> Result<f64> {
    if i == 0 || i >= embs.len() || w == 0 {
        return Err(ChunkError::IndexError(i));
    }
    let from = i.saturating_sub(w);
    let mut sum = 0.0;
    for j in from..i {
        sum += cosine(&embs[i], &embs[j])?;
    }
    Ok(sum / (i - from) as f64)
}

struct Building {
    start: usize,
    context: Vec<String>,
    sentences: Vec<usize>,
    tokens: usize,
    chars: usize,
}

impl Building {
    fn finish(self, source_id: &str, sentences: &[String], end: usize) -> Chunk {
        let body = join(self.sentences.iter().map(|&i| sentences[i].as_str()));
        let context = join(self.context.iter().map(String::as_str));
        let (text, overlap_bytes) = if context.is_empty() {
            (body, 0)
        } else {
            let mut t = context.clone();
            push_joined(&mut t, &body);
            (t, context.len())
        };
        Chunk {
            source_id: source_id.to_string(),
            span: [self.start, end],
            token_count: tokenize(&text).len(),
            text,
            method: ChunkMethod::Adaptive,
            overlap_bytes,
        }
    }
}

/// Coherence-driven chunking of an ordered sentence list.
pub fn adaptive_chunk(
    source_id: &str,
    sentences: &[String],
    embedder: &dyn EmbeddingProvider,
    params: &ChunkParams,
) -> Result<Vec<Chunk>> {
    params.validate()?;
    if sentences.is_empty() {
        return Err(ChunkError::EmptyInput);
    }
    let token_counts: Vec<usize> = sentences.iter().map(|s| tokenize(s).len()).collect();
    if let Some((index, &tokens)) = token_counts
        .iter()
        .enumerate()
        .find(|(_, &t)| t > params.max_tokens)
    {
        return Err(ChunkError::SentenceTooLong { index, tokens });
    }
    let embs = sentences
        .iter()
        .map(|s| embedder.embed(s, EmbedMode::Passage))
        .collect::<std::result::Result<Vec<_>, _>>()?;

    let mut chunks = Vec::new();
    let mut cur = Building {
        start: 0,
        context: Vec::new(),
        sentences: vec![0],
        tokens: token_counts[0],
        chars: sentences[0].chars().count(),
    };
    for i in 1..sentences.len() {
        let t = token_counts[i];
        if cur.tokens + t > params.max_tokens {
            let prev_body: Vec<String> = cur
                .sentences
                .iter()
                .flat_map(|&k| tokenize(&sentences[k]))
                .map(str::to_string)
                .collect();
            let keep = params.overlap.min(params.max_tokens - t).min(prev_body.len());
            let context = prev_body[prev_body.len() - keep..].to_vec();
            let done = std::mem::replace(
                &mut cur,
                Building {
                    start: i,
                    tokens: keep + t,
                    context,
                    sentences: vec![i],
                    chars: sentences[i].chars().count(),
                },
            );
            chunks.push(done.finish(source_id, sentences, i - 1));
            continue;
        }
        let boundary = coherence(&embs, i, params.window)? < params.theta;
        if boundary && cur.chars >= params.min_chars {
            let done = std::mem::replace(
                &mut cur,
                Building {
                    start: i,
                    context: Vec::new(),
                    sentences: vec![i],
                    tokens: t,
                    chars: sentences[i].chars().count(),
                },
            );
            chunks.push(done.finish(source_id, sentences, i - 1));
        } else {
            cur.sentences.push(i);
            cur.tokens += t;
            cur.chars += 1 + sentences[i].chars().count();
        }
    }
    chunks.push(cur.finish(source_id, sentences, sentences.len() - 1));
    Ok(chunks)
}

/// Windows of exactly `max_tokens` tokens stepping by `max_tokens - overlap`;
/// the last window may be shorter.
pub fn fixed_chunk(source_id: &str, text: &str, max_tokens: usize, overlap: usize) -> Result<Vec<Chunk>> {
    if max_tokens <= overlap {
        return Err(ChunkError::InvalidParams("max_tokens must exceed overlap".into()));
    }
    let tokens = tokenize(text);
    let stride = max_tokens - overlap;
    let mut chunks = Vec::new();
    let mut start = 0;
    while start < tokens.len() {
        let end = (start + max_tokens).min(tokens.len());
        let carried = if start == 0 { 0 } else { overlap };
        let context = join(tokens[start..start + carried].iter().copied());
        let body = join(tokens[start + carried..end].iter().copied());
        let mut chunk_text = context.clone();
        push_joined(&mut chunk_text, &body);
        chunks.push(Chunk {
            source_id: source_id.to_string(),
            span: [start, end - 1],
            token_count: end - start,
            text: chunk_text,
            method: ChunkMethod::FixedFallback,
            overlap_bytes: context.len(),
        });
        if end == tokens.len() {
            break;
        }
        start += stride;
    }
    Ok(chunks)
}

/// Fraction of `source`'s non-whitespace characters found in the chunk
/// bodies, counted as a multiset. Carried-over context is not counted.
pub fn validate_coverage(chunks: &[Chunk], source: &str) -> f64 {
    let mut need: HashMap<char, usize> = HashMap::new();
    let mut total = 0usize;
    for c in source.chars().filter(|c| !c.is_whitespace()) {
        *need.entry(c).or_default() += 1;
        total += 1;
    }
    if total == 0 {
        return 1.0;
    }
    let mut have: HashMap<char, usize> = HashMap::new();
    for chunk in chunks {
        for c in chunk.body().chars().filter(|c| !c.is_whitespace()) {
            *have.entry(c).or_default() += 1;
        }
    }
    let covered: usize = need
        .iter()
        .map(|(c, &n)| n.min(have.get(c).copied().unwrap_or(0)))
        .sum();
    covered as f64 / total as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChunkOutcome {
    pub chunks: Vec<Chunk>,
    pub coverage: f64,
    pub fell_back: bool,
}

/// Adaptive chunking with the coverage check; falls back to fixed windows
/// when a sentence exceeds the token limit or coverage is below
/// `coverage_min`.
pub fn chunk_document(
    source_id: &str,
    text: &str,
    embedder: &dyn EmbeddingProvider,
    params: &ChunkParams,
) -> Result<ChunkOutcome> {
    params.validate()?;
    let sentences = split_sentences(text);
    if sentences.is_empty() {
        return Err(ChunkError::EmptyInput);
    }
    let adaptive = match adaptive_chunk(source_id, &sentences, embedder, params) {
        Ok(chunks) => Some(chunks),
        Err(ChunkError::SentenceTooLong { .. }) => None,
        Err(e) => return Err(e),
    };
    if let Some(chunks) = adaptive {
        let coverage = validate_coverage(&chunks, text);
        if coverage >= params.coverage_min {
            return Ok(ChunkOutcome { chunks, coverage, fell_back: false });
        }
    }
    let chunks = fixed_chunk(source_id, text, params.max_tokens, params.overlap)?;
    let coverage = validate_coverage(&chunks, text);
    Ok(ChunkOutcome { chunks, coverage, fell_back: true })
}
