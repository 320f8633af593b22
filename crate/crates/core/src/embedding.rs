//! Text embedding: unit vectors, cosine similarity, leader clustering and
//! three interchangeable providers.
//!
//! * [`HashEmbedder`] feature-hashes tokens into a fixed number of buckets. It
//!   is deterministic and needs nothing outside the process, so tests and the
//!   bundled fixtures use it.
//! * [`FileEmbedder`] serves precomputed vectors keyed by exact text.
//! * [`HttpEmbedder`] calls an external embedding service and caches every
//!   response on disk, so a neural model can be plugged in.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::chunking::tokenize;

pub const DEFAULT_DIM: usize = 256;
pub const DEFAULT_SEED: u64 = 0x5EED;
pub const ENV_ENDPOINT: &str = "EMBED_ENDPOINT";
pub const ENV_AUTH_TOKEN: &str = "EMBED_AUTH_TOKEN";

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("no stored embedding for text `{0}`")]
    KeyMiss(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("bad response: {0}")]
    BadResponse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid embedder configuration: {0}")]
    Config(String),
}

pub type Result<T, E = EmbedError> = std::result::Result<T, E>;

/// Framing applied before embedding, mirroring the `passage:` / `query:`
/// instruction prefixes of asymmetric retrieval models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedMode {
    Passage,
    Query,
}

impl EmbedMode {
    pub fn prefix(self) -> &'static str {
        match self {
            EmbedMode::Passage => "passage: ",
            EmbedMode::Query => "query: ",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EmbedMode::Passage => "passage",
            EmbedMode::Query => "query",
        }
    }
}

/// A unit-norm vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    values: Vec<f64>,
    /// Set on the zero-text guard vector; such vectors take no part in
    /// similarity linking.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    degenerate: bool,
}

impl EmbeddingVector {
    /// Normalize `values`. Returns `None` for empty, zero or non-finite input.
    pub fn from_raw(values: Vec<f64>) -> Option<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return None;
        }
        Some(Self {
            values: values.into_iter().map(|v| v / norm).collect(),
            degenerate: false,
        })
    }

    /// First basis vector, flagged degenerate.
    pub fn guard(dim: usize) -> Self {
        let mut values = vec![0.0; dim.max(1)];
        values[0] = 1.0;
        Self { values, degenerate: true }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Dot product of two unit vectors, clamped to `[-1, 1]`.
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(EmbedError::DimMismatch(a.dim(), b.dim()));
    }
    let dot: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
    Ok(dot.clamp(-1.0, 1.0))
}

/// Source of text embeddings. Implementations must be safe to call from
/// several threads and return the same vector for the same `(text, mode)`.
pub trait EmbeddingProvider: Send + Sync {
    fn embed(&self, text: &str, mode: EmbedMode) -> Result<EmbeddingVector>;

    fn dim(&self) -> usize;

    /// Stable description recorded in graph headers.
    fn id(&self) -> String;
}

impl<P: EmbeddingProvider + ?Sized> EmbeddingProvider for Box<P> {
    fn embed(&self, text: &str, mode: EmbedMode) -> Result<EmbeddingVector> {
        (**self).embed(text, mode)
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn id(&self) -> String {
        (**self).id()
    }
}

impl<P: EmbeddingProvider + ?Sized> EmbeddingProvider for std::sync::Arc<P> {
    fn embed(&self, text: &str, mode: EmbedMode) -> Result<EmbeddingVector> {
        (**self).embed(text, mode)
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn id(&self) -> String {
        (**self).id()
    }
}

// ── Hash embedder ────────────────────────────────────────────────────────────

/// Signed feature hashing of [`tokenize`] tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashEmbedder {
    dim: usize,
    seed: u64,
}

impl HashEmbedder {
    pub fn new(dim: usize, seed: u64) -> Result<Self> {
        if dim < 8 {
            return Err(EmbedError::Config(format!("hash embedder dim must be >= 8, got {dim}")));
        }
        Ok(Self { dim, seed })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl Default for HashEmbedder {
    fn default() -> Self {
        Self { dim: DEFAULT_DIM, seed: DEFAULT_SEED }
    }
}

/// Feature-hash `text` framed by `mode` into `dim` signed buckets.
pub fn hash_embed(text: &str, mode: EmbedMode, dim: usize, seed: u64) -> EmbeddingVector {
    if tokenize(text).is_empty() {
        return EmbeddingVector::guard(dim);
    }
    let framed = format!("{}{}", mode.prefix(), text);
    let mut buckets = vec![0.0f64; dim];
    for token in tokenize(&framed) {
        let mut h = Sha256::new();
        h.update(seed.to_le_bytes());
        h.update(token.as_bytes());
        let digest = h.finalize();
        let word = u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"));
        let bucket = (word % dim as u64) as usize;
        let sign = if digest[8] & 1 == 0 { 1.0 } else { -1.0 };
        buckets[bucket] += sign;
    }
    EmbeddingVector::from_raw(buckets).unwrap_or_else(|| EmbeddingVector::guard(dim))
}

impl EmbeddingProvider for HashEmbedder {
    fn embed(&self, text: &str, mode: EmbedMode) -> Result<EmbeddingVector> {
        Ok(hash_embed(text, mode, self.dim, self.seed))
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn id(&self) -> String {
        format!("hash:{}:{}", self.dim, self.seed)
    }
}

// ── File embedder ────────────────────────────────────────────────────────────

#[derive(Debug, Deserialize)]
struct StoredVector {
    text: String,
    #[serde(default)]
    mode: Option<EmbedMode>,
    vector: Vec<f64>,
}

/// Precomputed vectors from a line-delimited `{text, mode?, vector}` file.
///
/// A record without `mode` answers both modes; a record with one answers only
/// that mode and takes precedence.
#[derive(Debug, Clone)]
pub struct FileEmbedder {
    vectors: HashMap<(String, Option<EmbedMode>), EmbeddingVector>,
    dim: usize,
    digest: String,
}

impl FileEmbedder {
    pub fn open(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        let digest = hex::encode(Sha256::digest(&bytes));
        let mut vectors = HashMap::new();
        let mut dim = None;
        for (i, line) in bytes.split(|&b| b == b'\n').enumerate() {
            if line.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            let rec: StoredVector = serde_json::from_slice(line)
                .map_err(|e| EmbedError::BadResponse(format!("{}:{}: {e}", path.display(), i + 1)))?;
            let v = EmbeddingVector::from_raw(rec.vector).ok_or_else(|| {
                EmbedError::BadResponse(format!("{}:{}: zero or non-finite vector", path.display(), i + 1))
            })?;
            match dim {
                None => dim = Some(v.dim()),
                Some(d) if d != v.dim() => return Err(EmbedError::DimMismatch(d, v.dim())),
                _ => {}
            }
            vectors.insert((rec.text, rec.mode), v);
        }
        Ok(Self {
            vectors,
            dim: dim.unwrap_or(0),
            digest,
        })
    }
}

impl EmbeddingProvider for FileEmbedder {
    fn embed(&self, text: &str, mode: EmbedMode) -> Result<EmbeddingVector> {
        self.vectors
            .get(&(text.to_string(), Some(mode)))
            .or_else(|| self.vectors.get(&(text.to_string(), None)))
            .cloned()
            .ok_or_else(|| EmbedError::KeyMiss(text.to_string()))
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn id(&self) -> String {
        format!("file:{}", &self.digest[..16])
    }
}

// ── HTTP embedder ────────────────────────────────────────────────────────────

#[derive(Debug, Serialize, Deserialize)]
struct CacheRecord {
    key_hash: String,
    text_prefix: String,
    vector: Vec<f64>,
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    text: &'a str,
    mode: EmbedMode,
}

#[derive(Deserialize)]
struct EmbedResponse {
    vector: Vec<f64>,
}

/// Client for an embedding service: `POST {text, mode}` returning `{vector}`.
///
/// Responses are cached in memory and, when a cache path is configured,
/// appended to a line-delimited cache file that is reloaded on startup.
pub struct HttpEmbedder {
    endpoint: String,
    auth_token: Option<String>,
    agent: ureq::Agent,
    max_attempts: u32,
    dim: usize,
    cache: Mutex<HashMap<String, EmbeddingVector>>,
    cache_path: Option<PathBuf>,
}

impl HttpEmbedder {
    pub fn new(endpoint: impl Into<String>, auth_token: Option<String>, dim: usize) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(60)))
            .build()
            .into();
        Self {
            endpoint: endpoint.into(),
            auth_token,
            agent,
            max_attempts: 3,
            dim,
            cache: Mutex::new(HashMap::new()),
            cache_path: None,
        }
    }

    /// Build from `EMBED_ENDPOINT` / `EMBED_AUTH_TOKEN`.
    pub fn from_env(dim: usize) -> Result<Self> {
        let endpoint = std::env::var(ENV_ENDPOINT)
            .map_err(|_| EmbedError::Config(format!("{ENV_ENDPOINT} is not set")))?;
        Ok(Self::new(endpoint, std::env::var(ENV_AUTH_TOKEN).ok(), dim))
    }

    pub fn with_max_attempts(mut self, attempts: u32) -> Self {
        self.max_attempts = attempts.max(1);
        self
    }

    /// Attach an on-disk cache, loading any records already present.
    pub fn with_cache_file(mut self, path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        if path.exists() {
            let mut cache = self.cache.lock().expect("cache lock");
            for line in BufReader::new(File::open(&path)?).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: CacheRecord = serde_json::from_str(&line)
                    .map_err(|e| EmbedError::BadResponse(format!("cache {}: {e}", path.display())))?;
                if let Some(v) = EmbeddingVector::from_raw(rec.vector) {
                    cache.insert(rec.key_hash, v);
                }
            }
        }
        self.cache_path = Some(path);
        Ok(self)
    }

    pub fn cache_key(text: &str, mode: EmbedMode) -> String {
        let mut h = Sha256::new();
        h.update(mode.as_str().as_bytes());
        h.update([0u8]);
        h.update(text.as_bytes());
        hex::encode(h.finalize())
    }

    fn fetch(&self, text: &str, mode: EmbedMode) -> Result<Vec<f64>> {
        let mut last_err = String::new();
        for attempt in 0..self.max_attempts {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(100 << attempt.min(5)));
            }
            let mut req = self.agent.post(&self.endpoint);
            if let Some(token) = &self.auth_token {
                req = req.header("Authorization", &format!("Bearer {token}"));
            }
            match req.send_json(EmbedRequest { text, mode }) {
                Ok(mut resp) => {
                    let body: EmbedResponse = resp
                        .body_mut()
                        .read_json()
                        .map_err(|e| EmbedError::BadResponse(e.to_string()))?;
                    return Ok(body.vector);
                }
                Err(ureq::Error::StatusCode(code)) if code < 500 => {
                    return Err(EmbedError::BadResponse(format!("HTTP {code}")));
                }
                Err(e) => last_err = e.to_string(),
            }
        }
        Err(EmbedError::Transport(format!(
            "{} after {} attempts: {last_err}",
            self.endpoint, self.max_attempts
        )))
    }
}

impl EmbeddingProvider for HttpEmbedder {
    fn embed(&self, text: &str, mode: EmbedMode) -> Result<EmbeddingVector> {
        let key = Self::cache_key(text, mode);
        if let Some(v) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(v.clone());
        }
        let raw = self.fetch(text, mode)?;
        let v = EmbeddingVector::from_raw(raw.clone())
            .ok_or_else(|| EmbedError::BadResponse("zero or non-finite vector".into()))?;
        if self.dim != 0 && v.dim() != self.dim {
            return Err(EmbedError::DimMismatch(self.dim, v.dim()));
        }
        let mut cache = self.cache.lock().expect("cache lock");
        if let Some(path) = &self.cache_path {
            let rec = CacheRecord {
                key_hash: key.clone(),
                text_prefix: text.chars().take(32).collect(),
                vector: raw,
            };
            let mut f = OpenOptions::new().create(true).append(true).open(path)?;
            writeln!(f, "{}", serde_json::to_string(&rec).expect("cache record serializes"))?;
        }
        cache.insert(key, v.clone());
        Ok(v)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn id(&self) -> String {
        format!("http:{}", self.endpoint)
    }
}

// ── Provider selection ───────────────────────────────────────────────────────

/// Parsed `--embedder` value: `hash`, `hash:<dim>:<seed>`, `file:<path>` or
/// `http`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmbedderSpec {
    Hash { dim: usize, seed: u64 },
    File(PathBuf),
    Http,
}

impl EmbedderSpec {
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = || EmbedError::Config(format!("unrecognized embedder `{spec}`"));
        if spec == "hash" {
            return Ok(Self::Hash { dim: DEFAULT_DIM, seed: DEFAULT_SEED });
        }
        if let Some(rest) = spec.strip_prefix("hash:") {
            let (dim, seed) = rest.split_once(':').ok_or_else(bad)?;
            return Ok(Self::Hash {
                dim: dim.parse().map_err(|_| bad())?,
                seed: seed.parse().map_err(|_| bad())?,
            });
        }
        if let Some(path) = spec.strip_prefix("file:") {
            return Ok(Self::File(PathBuf::from(path)));
        }
        if spec == "http" || spec.starts_with("http:") {
            return Ok(Self::Http);
        }
        Err(bad())
    }

    /// Instantiate the provider. `http_cache` names the response cache file.
    pub fn build(&self, http_cache: Option<&Path>) -> Result<Box<dyn EmbeddingProvider>> {
        Ok(match self {
            Self::Hash { dim, seed } => Box::new(HashEmbedder::new(*dim, *seed)?),
            Self::File(path) => Box::new(FileEmbedder::open(path)?),
            Self::Http => {
                let client = HttpEmbedder::from_env(0)?;
                match http_cache {
                    Some(p) => Box::new(client.with_cache_file(p)?),
                    None => Box::new(client),
                }
            }
        })
    }
}

// ── Clustering ───────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub cluster_id: usize,
    pub leader_id: String,
    pub member_ids: Vec<String>,
    pub centroid: EmbeddingVector,
}

/// Greedy leader clustering in id order.
///
/// Each item joins the first cluster whose leader has cosine `>= threshold`
/// with it, otherwise it founds a new cluster. Centroids are normalized means.
pub fn cluster(items: &[(String, EmbeddingVector)], threshold: f64) -> Result<Vec<ClusterAssignment>> {
    let mut order: Vec<&(String, EmbeddingVector)> = items.iter().collect();
    order.sort_by(|a, b| a.0.cmp(&b.0));

    struct Open<'a> {
        leader: &'a EmbeddingVector,
        leader_id: &'a str,
        members: Vec<&'a (String, EmbeddingVector)>,
    }
    let mut open: Vec<Open> = Vec::new();
    'items: for item in order {
        for c in open.iter_mut() {
            if cosine(c.leader, &item.1)? >= threshold {
                c.members.push(item);
                continue 'items;
            }
        }
        open.push(Open { leader: &item.1, leader_id: &item.0, members: vec![item] });
    }

    Ok(open
        .into_iter()
        .enumerate()
        .map(|(cluster_id, c)| {
            let dim = c.leader.dim();
            let mut sum = vec![0.0; dim];
            for (_, v) in &c.members {
                for (s, x) in sum.iter_mut().zip(v.values()) {
                    *s += x;
                }
            }
            ClusterAssignment {
                cluster_id,
                leader_id: c.leader_id.to_string(),
                member_ids: c.members.iter().map(|(id, _)| id.clone()).collect(),
                centroid: EmbeddingVector::from_raw(sum).unwrap_or_else(|| c.leader.clone()),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(values: &[f64]) -> EmbeddingVector {
        EmbeddingVector::from_raw(values.to_vec()).unwrap()
    }

    fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> EmbeddingVector {
        unit(&(0..dim).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>())
    }

    #[test]
    fn cosine_basics() {
        let x = unit(&[0.3, -0.2, 0.9]);
        assert!((cosine(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&unit(&[1.0, 0.0]), &unit(&[0.0, 1.0])).unwrap(), 0.0);
        assert!(matches!(cosine(&unit(&[1.0]), &unit(&[1.0, 0.0])), Err(EmbedError::DimMismatch(1, 2))));
    }

    #[test]
    fn cosine_matches_direct_dot_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let a = random_unit(&mut rng, 32);
            let b = random_unit(&mut rng, 32);
            let mut dot = 0.0;
            for i in 0..32 {
                dot += a.values()[i] * b.values()[i];
            }
            assert!((cosine(&a, &b).unwrap() - dot).abs() < 1e-12);
        }
    }

    #[test]
    fn hash_embedder_is_deterministic_and_mode_sensitive() {
        let e = HashEmbedder::default();
        let a = e.embed("học mà hành", EmbedMode::Passage).unwrap();
        let b = e.embed("học mà hành", EmbedMode::Passage).unwrap();
        assert_eq!(a, b);
        assert!((a.norm() - 1.0).abs() < 1e-9);
        let q = e.embed("học mà hành", EmbedMode::Query).unwrap();
        assert_ne!(a, q);
    }

    #[test]
    fn hash_embedder_empty_text_guard() {
        let v = hash_embed("   ", EmbedMode::Passage, 16, 1);
        assert!(v.is_degenerate());
        assert_eq!(v.values()[0], 1.0);
        assert!(HashEmbedder::new(4, 0).is_err());
    }

    #[test]
    fn hash_embedder_disjoint_texts_are_nearly_orthogonal() {
        let e = HashEmbedder::new(1024, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut worst: f64 = 0.0;
        for pair in 0..100 {
            let a: Vec<String> = (0..12).map(|i| format!("a{pair}x{i}y{}", rng.random::<u32>())).collect();
            let b: Vec<String> = (0..12).map(|i| format!("b{pair}x{i}y{}", rng.random::<u32>())).collect();
            // different framing tokens so only content tokens can collide
            let va = e.embed(&a.join(" "), EmbedMode::Passage).unwrap();
            let vb = e.embed(&b.join(" "), EmbedMode::Query).unwrap();
            worst = worst.max(cosine(&va, &vb).unwrap().abs());
        }
        assert!(worst < 0.3, "worst |cos| = {worst}");
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(EmbedderSpec::parse("hash").unwrap(), EmbedderSpec::Hash { dim: 256, seed: DEFAULT_SEED });
        assert_eq!(EmbedderSpec::parse("hash:64:9").unwrap(), EmbedderSpec::Hash { dim: 64, seed: 9 });
        assert_eq!(EmbedderSpec::parse("file:/tmp/v.jsonl").unwrap(), EmbedderSpec::File("/tmp/v.jsonl".into()));
        assert_eq!(EmbedderSpec::parse("http").unwrap(), EmbedderSpec::Http);
        assert!(EmbedderSpec::parse("bert").is_err());
    }

    #[test]
    fn file_embedder_lookup() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vectors.jsonl");
        std::fs::write(
            &path,
            "{\"text\":\"仁\",\"vector\":[3.0,4.0]}\n{\"text\":\"禮\",\"mode\":\"query\",\"vector\":[0.0,2.0]}\n",
        )
        .unwrap();
        let f = FileEmbedder::open(&path).unwrap();
        let v = f.embed("仁", EmbedMode::Passage).unwrap();
        assert!((v.values()[0] - 0.6).abs() < 1e-12 && (v.values()[1] - 0.8).abs() < 1e-12);
        assert_eq!(f.embed("禮", EmbedMode::Query).unwrap().values(), &[0.0, 1.0]);
        assert!(matches!(f.embed("禮", EmbedMode::Passage), Err(EmbedError::KeyMiss(_))));
        assert!(matches!(f.embed("智", EmbedMode::Passage), Err(EmbedError::KeyMiss(_))));
        assert_eq!(f.dim(), 2);
    }

    #[test]
    fn clustering_cases() {
        let same: Vec<_> = (0..4).map(|i| (format!("n{i}"), unit(&[1.0, 1.0]))).collect();
        assert_eq!(cluster(&same, 0.75).unwrap().len(), 1);

        let ortho: Vec<_> = (0..3)
            .map(|i| {
                let mut v = vec![0.0; 3];
                v[i] = 1.0;
                (format!("n{i}"), unit(&v))
            })
            .collect();
        let c = cluster(&ortho, 0.5).unwrap();
        assert_eq!(c.len(), 3);
        assert!(c.iter().all(|a| a.member_ids.len() == 1));
    }

    #[test]
    fn clustering_recovers_two_bundles() {
        let items = vec![
            ("a1".to_string(), unit(&[1.0, 0.05, 0.0, 0.0])),
            ("b1".to_string(), unit(&[0.0, 0.0, 1.0, 0.05])),
            ("a2".to_string(), unit(&[1.0, 0.0, 0.05, 0.0])),
            ("b2".to_string(), unit(&[0.05, 0.0, 1.0, 0.0])),
            ("a3".to_string(), unit(&[1.0, 0.0, 0.0, 0.1])),
            ("b3".to_string(), unit(&[0.0, 0.1, 1.0, 0.0])),
        ];
        // oracle: the pairwise table separates the bundles
        for (i, a) in items.iter().enumerate() {
            for b in &items[i + 1..] {
                let c = cosine(&a.1, &b.1).unwrap();
                if a.0.as_bytes()[0] == b.0.as_bytes()[0] {
                    assert!(c > 0.9);
                } else {
                    assert!(c < 0.1);
                }
            }
        }
        let c = cluster(&items, 0.75).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].member_ids, ["a1", "a2", "a3"]);
        assert_eq!(c[1].member_ids, ["b1", "b2", "b3"]);
        assert!((c[0].centroid.norm() - 1.0).abs() < 1e-9);
    }
}
