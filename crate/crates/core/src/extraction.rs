//! Speaker attribution, concept extraction, concept co-occurrence and
//! embedding-based sense selection for Classical Chinese sentences.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{cosine, EmbedError, EmbedMode, EmbeddingProvider};

const DEFAULT_CONCEPTS: &str = include_str!("../data/concepts.json");
const DEFAULT_SPEAKERS: &str = include_str!("../data/speakers.json");

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("no candidate meanings for `{0}`")]
    NoCandidates(String),
    #[error("duplicate speaker marker `{0}`")]
    DuplicateMarker(String),
    #[error("malformed table: {0}")]
    Malformed(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

pub type Result<T, E = ExtractError> = std::result::Result<T, E>;

// ── Speakers ─────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpeakerPattern {
    pub marker: String,
    #[serde(rename = "name")]
    pub speaker_name: String,
}

impl SpeakerPattern {
    /// Marker length in characters; longer markers win at the same offset.
    pub fn priority(&self) -> usize {
        self.marker.chars().count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpeakerHit {
    pub speaker_name: String,
    /// Character offset of the marker.
    pub offset: usize,
}

pub fn default_speakers() -> Vec<SpeakerPattern> {
    parse_speakers(DEFAULT_SPEAKERS).expect("bundled speaker table is valid")
}

pub fn parse_speakers(json: &str) -> Result<Vec<SpeakerPattern>> {
    let table: Vec<SpeakerPattern> =
        serde_json::from_str(json).map_err(|e| ExtractError::Malformed(e.to_string()))?;
    let mut seen = BTreeSet::new();
    for p in &table {
        if p.marker.is_empty() {
            return Err(ExtractError::Malformed("empty speaker marker".into()));
        }
        if !seen.insert(p.marker.as_str()) {
            return Err(ExtractError::DuplicateMarker(p.marker.clone()));
        }
    }
    Ok(table)
}

pub fn load_speakers(path: &Path) -> Result<Vec<SpeakerPattern>> {
    parse_speakers(&std::fs::read_to_string(path)?)
}

/// Left-to-right scan for attribution markers. At each offset the longest
/// matching marker wins (table order breaks ties) and scanning resumes after
/// it, so a marker nested in a longer one is never reported separately.
pub fn detect_speakers(han_text: &str, patterns: &[SpeakerPattern]) -> Vec<SpeakerHit> {
    let chars: Vec<(usize, char)> = han_text.char_indices().collect();
    let mut hits = Vec::new();
    let mut pos = 0;
    while pos < chars.len() {
        let rest = &han_text[chars[pos].0..];
        let best = patterns
            .iter()
            .filter(|p| rest.starts_with(p.marker.as_str()))
            .fold(None::<&SpeakerPattern>, |best, p| match best {
                Some(b) if b.priority() >= p.priority() => Some(b),
                _ => Some(p),
            });
        match best {
            Some(p) => {
                hits.push(SpeakerHit {
                    speaker_name: p.speaker_name.clone(),
                    offset: pos,
                });
                pos += p.priority();
            }
            None => pos += 1,
        }
    }
    hits
}

// ── Concepts ─────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Virtue,
    Cultivation,
    Foundation,
    Harmony,
    Relation,
    Learning,
    Social,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptDef {
    #[serde(rename = "char")]
    pub character: String,
    pub english: String,
    pub vietnamese: String,
    pub category: Category,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptHit {
    pub concept: ConceptDef,
    pub sentence_id: String,
    /// Character offset of the first occurrence.
    pub position: usize,
    pub count: usize,
}

/// The 23-concept taxonomy shipped with the crate.
pub fn default_taxonomy() -> Vec<ConceptDef> {
    parse_taxonomy(DEFAULT_CONCEPTS).expect("bundled taxonomy is valid")
}

pub fn parse_taxonomy(json: &str) -> Result<Vec<ConceptDef>> {
    let table: Vec<ConceptDef> =
        serde_json::from_str(json).map_err(|e| ExtractError::Malformed(e.to_string()))?;
    if table.iter().any(|c| c.character.is_empty()) {
        return Err(ExtractError::Malformed("empty concept character".into()));
    }
    Ok(table)
}

pub fn load_taxonomy(path: &Path) -> Result<Vec<ConceptDef>> {
    parse_taxonomy(&std::fs::read_to_string(path)?)
}

/// Concepts whose Vietnamese reading equals `reading` (case-insensitive).
/// Several concepts can share one reading, e.g. 忠 and 中.
pub fn concepts_by_reading<'a>(taxonomy: &'a [ConceptDef], reading: &str) -> Vec<&'a ConceptDef> {
    let needle = reading.to_lowercase();
    taxonomy
        .iter()
        .filter(|c| c.vietnamese.to_lowercase() == needle)
        .collect()
}

/// One hit per taxonomy concept present in `han_text`, with its occurrence
/// count. Matching is on raw characters, without word segmentation.
pub fn extract_concepts(han_text: &str, sentence_id: &str, taxonomy: &[ConceptDef]) -> Vec<ConceptHit> {
    let mut hits: Vec<ConceptHit> = taxonomy
        .iter()
        .filter_map(|c| {
            let count = han_text.matches(c.character.as_str()).count();
            let byte = han_text.find(c.character.as_str())?;
            Some(ConceptHit {
                concept: c.clone(),
                sentence_id: sentence_id.to_string(),
                position: han_text[..byte].chars().count(),
                count,
            })
        })
        .collect();
    hits.sort_by_key(|h| h.position);
    hits
}

/// Symmetric sentence-level co-occurrence counts. Pairs are stored once with
/// the lexicographically smaller concept first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cooccurrence {
    pub counts: BTreeMap<(String, String), usize>,
}

impl Cooccurrence {
    pub fn get(&self, a: &str, b: &str) -> usize {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.counts
            .get(&(key.0.to_string(), key.1.to_string()))
            .copied()
            .unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

/// For every unordered pair of distinct concepts, the number of sentences in
/// which both occur.
pub fn cooccurrence(hits_by_sentence: &BTreeMap<String, BTreeSet<String>>) -> Cooccurrence {
    let mut counts = BTreeMap::new();
    for concepts in hits_by_sentence.values() {
        let list: Vec<&String> = concepts.iter().collect();
        for (i, a) in list.iter().enumerate() {
            for b in &list[i + 1..] {
                *counts.entry(((*a).clone(), (*b).clone())).or_insert(0) += 1;
            }
        }
    }
    Cooccurrence { counts }
}

// ── Sense resolution ─────────────────────────────────────────────────────────

/// Chosen sense plus every candidate's score, kept so that alternatives stay
/// visible downstream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SenseResolution {
    pub character: String,
    pub chosen: String,
    pub chosen_index: usize,
    pub score: f64,
    pub scores: Vec<(String, f64)>,
}

/// Pick the candidate meaning whose embedding is closest to the context.
/// Ties go to the lowest candidate index.
pub fn resolve_sense(
    character: &str,
    candidates: &[String],
    context: &str,
    embedder: &dyn EmbeddingProvider,
) -> Result<SenseResolution> {
    if candidates.is_empty() {
        return Err(ExtractError::NoCandidates(character.to_string()));
    }
    let ctx = embedder.embed(context, EmbedMode::Passage)?;
    let mut scores = Vec::with_capacity(candidates.len());
    for c in candidates {
        let v = embedder.embed(c, EmbedMode::Query)?;
        scores.push((c.clone(), cosine(&v, &ctx)?));
    }
    let mut chosen_index = 0;
    for (i, (_, s)) in scores.iter().enumerate() {
        if *s > scores[chosen_index].1 {
            chosen_index = i;
        }
    }
    Ok(SenseResolution {
        character: character.to_string(),
        chosen: candidates[chosen_index].clone(),
        chosen_index,
        score: scores[chosen_index].1,
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{EmbeddingVector, HashEmbedder};

    #[test]
    fn default_tables() {
        let t = default_taxonomy();
        assert_eq!(t.len(), 23);
        let per_cat = |c: Category| t.iter().filter(|d| d.category == c).count();
        assert_eq!(per_cat(Category::Virtue), 5);
        assert_eq!(per_cat(Category::Cultivation), 3);
        assert_eq!(per_cat(Category::Foundation), 2);
        assert_eq!(per_cat(Category::Harmony), 2);
        assert_eq!(per_cat(Category::Relation), 4);
        assert_eq!(per_cat(Category::Learning), 3);
        assert_eq!(per_cat(Category::Social), 4);
        let ren = &t[0];
        assert_eq!((ren.character.as_str(), ren.english.as_str(), ren.vietnamese.as_str()), ("仁", "Benevolence", "Nhân"));
        assert_eq!(default_speakers().len(), 4);
    }

    #[test]
    fn speakers() {
        let p = default_speakers();
        let names = |t: &str| detect_speakers(t, &p).into_iter().map(|h| (h.speaker_name, h.offset)).collect::<Vec<_>>();
        assert_eq!(names("曾子曰:吾日三省吾身"), [("Zengzi".to_string(), 0)]);
        assert_eq!(names("子曰:學而時習之"), [("Confucius".to_string(), 0)]);
        assert!(names("天命之謂性").is_empty());
        assert_eq!(
            names("孟子曰:仁也。子曰:禮"),
            [("Mencius".to_string(), 0), ("Confucius".to_string(), 7)]
        );
    }

    #[test]
    fn duplicate_markers_rejected() {
        let json = r#"[{"marker":"子曰","name":"A"},{"marker":"子曰","name":"B"}]"#;
        assert!(matches!(parse_speakers(json), Err(ExtractError::DuplicateMarker(_))));
    }

    #[test]
    fn concept_hits() {
        let t = default_taxonomy();
        let chars = |s: &str| extract_concepts(s, "x", &t).into_iter().map(|h| (h.concept.character, h.count)).collect::<Vec<_>>();
        assert_eq!(chars("克己復禮為仁"), [("禮".to_string(), 1), ("仁".to_string(), 1)]);
        assert!(chars("吾日三省吾身").is_empty());
        let learn = extract_concepts("學而時習之", "x", &t);
        assert_eq!(learn.len(), 1);
        assert_eq!(learn[0].concept.category, Category::Learning);
        assert_eq!(chars("仁者愛人，仁"), [("仁".to_string(), 2)]);
    }

    #[test]
    fn shared_reading_lookup() {
        let t = default_taxonomy();
        let trung: Vec<_> = concepts_by_reading(&t, "trung").iter().map(|c| c.character.clone()).collect();
        assert_eq!(trung, ["中", "忠"]);
    }

    #[test]
    fn cooccurrence_cases() {
        let mut m = BTreeMap::new();
        m.insert("s1".to_string(), BTreeSet::from(["仁".to_string(), "禮".to_string()]));
        let c = cooccurrence(&m);
        assert_eq!(c.get("仁", "禮"), 1);
        assert_eq!(c.get("禮", "仁"), 1);
        assert_eq!(c.counts.len(), 1);

        let mut single = BTreeMap::new();
        single.insert("s1".to_string(), BTreeSet::from(["仁".to_string()]));
        assert!(cooccurrence(&single).counts.is_empty());
    }

    struct Fixed(Vec<(&'static str, [f64; 3])>);

    impl EmbeddingProvider for Fixed {
        fn embed(&self, text: &str, _: EmbedMode) -> crate::embedding::Result<EmbeddingVector> {
            let v = self.0.iter().find(|(t, _)| *t == text).map(|(_, v)| *v).unwrap_or([0.0, 0.0, 1.0]);
            Ok(EmbeddingVector::from_raw(v.to_vec()).unwrap())
        }
        fn dim(&self) -> usize {
            3
        }
        fn id(&self) -> String {
            "fixed".into()
        }
    }

    #[test]
    fn sense_resolution() {
        let e = HashEmbedder::default();
        let one = resolve_sense("道", &["con đường".to_string()], "anything", &e).unwrap();
        assert_eq!(one.chosen, "con đường");
        assert!(matches!(resolve_sense("道", &[], "x", &e), Err(ExtractError::NoCandidates(_))));

        let ctx = "子曰:參乎！吾道一以貫之";
        let p = Fixed(vec![
            (ctx, [1.0, 0.2, 0.0]),
            ("path", [0.0, 1.0, 0.0]),
            ("speak", [0.0, 0.0, 1.0]),
            ("doctrine", [1.0, 0.1, 0.0]),
        ]);
        let cands: Vec<String> = ["path", "speak", "doctrine"].iter().map(|s| s.to_string()).collect();
        let r = resolve_sense("道", &cands, ctx, &p).unwrap();
        assert_eq!(r.chosen, "doctrine");
        assert_eq!(r.scores.len(), 3);

        let tie = Fixed(vec![("ctx", [1.0, 0.0, 0.0]), ("a", [0.0, 1.0, 0.0]), ("b", [0.0, 1.0, 0.0])]);
        let r = resolve_sense("x", &["a".to_string(), "b".to_string()], "ctx", &tie).unwrap();
        assert_eq!(r.chosen_index, 0);
    }
}
