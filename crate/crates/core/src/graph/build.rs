//! Layer builders. They run in a fixed order on a single [`GraphBuilder`]:
//! textual, linguistic, conceptual, commentary, speaker, semantic.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{node_id, Attrs, Edge, Graph, Result, VerificationItem};
use crate::chunking::Chunk;
use crate::corpus::{encode_sect, CommentaryRecord, DictEntry, SentenceRecord, ValidationFlag};
use crate::embedding::{cluster, cosine, EmbedMode, EmbeddingProvider, EmbeddingVector};
use crate::extraction::{
    cooccurrence, detect_speakers, extract_concepts, resolve_sense, ConceptDef, ConceptHit, SpeakerPattern,
};
use crate::ontology::{EntityClass as C, RelationType as R};
use crate::text::{is_han, join};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContextScope {
    /// Only sentences from the book of the explained section.
    Book,
    Corpus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BuildConfig {
    pub domain: String,
    pub school: String,
    /// Cosine threshold for CONTEXTUALIZES.
    pub context_threshold: f64,
    pub context_scope: ContextScope,
    pub verification_rate: f64,
    pub verification_seed: u64,
    pub top_k: usize,
    pub sim_min: f64,
    pub cluster_threshold: f64,
    pub embed_classes: Vec<C>,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            domain: "Chinese Philosophy".into(),
            school: "Confucianism".into(),
            context_threshold: 0.75,
            context_scope: ContextScope::Book,
            verification_rate: 0.1,
            verification_seed: 42,
            top_k: 5,
            sim_min: 0.75,
            cluster_threshold: 0.75,
            embed_classes: vec![C::Sentence, C::VietnameseSentence, C::CommentaryChunk],
        }
    }
}

/// What one builder step added.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphDelta {
    pub nodes: usize,
    pub edges: usize,
    /// Han words without a dictionary entry.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gaps: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<ValidationFlag>,
}

/// Chapter key: the section id up to its first `.` or `-`.
pub fn chapter_of(sect_id: &str) -> &str {
    sect_id.split(['.', '-']).next().unwrap_or(sect_id)
}

/// Distinct ideograph tokens of a Han sentence, in first-occurrence order.
pub fn han_words(han_text: &str) -> Vec<String> {
    let mut seen = BTreeSet::new();
    han_text
        .chars()
        .filter(|c| is_han(*c))
        .filter(|c| seen.insert(*c))
        .map(String::from)
        .collect()
}

/// Text a node contributes to embedding. SENTENCE nodes join their three
/// parallel forms; everything else uses its `text` attribute.
pub fn embedding_text(node: &super::Node) -> String {
    if node.entity_class == C::Sentence {
        return join(["han", "hanviet", "viet"].iter().filter_map(|k| node.attr_str(k)));
    }
    node.primary_text().unwrap_or_default().to_string()
}

fn attrs(pairs: impl IntoIterator<Item = (&'static str, Value)>) -> Attrs {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

pub fn sentence_node_id(rec: &SentenceRecord) -> String {
    node_id(C::Sentence, &rec.id().to_string())
}

fn section_key(file: &str, sect: &str) -> String {
    format!("{file}.{}", encode_sect(sect))
}

pub struct GraphBuilder<'a> {
    graph: Graph,
    pub config: BuildConfig,
    embedder: &'a dyn EmbeddingProvider,
    /// Passage embeddings by node id, reused across layers.
    vectors: HashMap<String, EmbeddingVector>,
    /// SECTION node ids by raw sect_id.
    sections: BTreeMap<String, Vec<String>>,
}

impl<'a> GraphBuilder<'a> {
    pub fn new(config: BuildConfig, embedder: &'a dyn EmbeddingProvider) -> Self {
        let mut graph = Graph::new();
        graph.header.embedder_id = embedder.id();
        graph
            .header
            .seeds
            .insert("verification".into(), config.verification_seed);
        Self {
            graph,
            config,
            embedder,
            vectors: HashMap::new(),
            sections: BTreeMap::new(),
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn finish(self) -> Graph {
        self.graph
    }

    fn vector(&mut self, id: &str) -> Result<EmbeddingVector> {
        if let Some(v) = self.vectors.get(id) {
            return Ok(v.clone());
        }
        let node = self.graph.node(id).ok_or_else(|| super::GraphError::UnknownNode(id.into()))?;
        let v = self.embedder.embed(&embedding_text(node), EmbedMode::Passage)?;
        self.vectors.insert(id.to_string(), v.clone());
        Ok(v)
    }

    fn node(&mut self, d: &mut GraphDelta, class: C, key: &str, a: Attrs) -> Result<String> {
        let id = node_id(class, key);
        if self.graph.add_node(id.clone(), class, a)? {
            d.nodes += 1;
        }
        Ok(id)
    }

    fn edge(&mut self, d: &mut GraphDelta, edge: Edge) -> Result<()> {
        if self.graph.add_edge_once(edge)? {
            d.edges += 1;
        }
        Ok(())
    }

    pub fn build_textual(&mut self, records: &[SentenceRecord]) -> Result<GraphDelta> {
        let mut d = GraphDelta::default();
        let domain = self.config.domain.clone();
        let school = self.config.school.clone();
        let dom = self.node(&mut d, C::Domain, &domain, attrs([("name", json!(domain))]))?;
        let sch = self.node(&mut d, C::School, &school, attrs([("name", json!(school))]))?;
        self.edge(&mut d, Edge::new(&dom, &sch, R::Contains))?;

        let mut prev: Option<(String, String, String)> = None; // (file, sect, sentence id)
        for rec in records {
            let file = &rec.file_id;
            let chapter = chapter_of(&rec.sect_id);
            let book = self.node(&mut d, C::Book, file, attrs([("name", json!(file))]))?;
            let chap = self.node(
                &mut d,
                C::Chapter,
                &format!("{file}.{}", encode_sect(chapter)),
                attrs([("file_id", json!(file)), ("chapter", json!(chapter))]),
            )?;
            let skey = section_key(file, &rec.sect_id);
            let sect = self.node(
                &mut d,
                C::Section,
                &skey,
                attrs([("file_id", json!(file)), ("sect_id", json!(rec.sect_id))]),
            )?;
            let ids = self.sections.entry(rec.sect_id.clone()).or_default();
            if !ids.contains(&sect) {
                ids.push(sect.clone());
            }
            let page = self.node(
                &mut d,
                C::Page,
                &format!("{skey}.{}", rec.page_id),
                attrs([("page_id", json!(rec.page_id))]),
            )?;
            let sid = self.node(
                &mut d,
                C::Sentence,
                &rec.id().to_string(),
                attrs([
                    ("file_id", json!(file)),
                    ("sect_id", json!(rec.sect_id)),
                    ("page_id", json!(rec.page_id)),
                    ("sent_id", json!(rec.sent_id)),
                    ("han", json!(rec.han_text)),
                    ("hanviet", json!(rec.hanviet_text)),
                    ("viet", json!(rec.viet_text)),
                ]),
            )?;
            self.edge(&mut d, Edge::new(&sch, &book, R::Contains))?;
            self.edge(&mut d, Edge::new(&book, &chap, R::Contains))?;
            self.edge(&mut d, Edge::new(&chap, &sect, R::Contains))?;
            self.edge(&mut d, Edge::new(&sect, &page, R::Contains))?;
            self.edge(&mut d, Edge::new(&page, &sid, R::Contains))?;

            if let Some((pf, ps, psid)) = &prev {
                if pf == file && ps == &rec.sect_id {
                    self.edge(&mut d, Edge::new(psid, &sid, R::Follows))?;
                }
            }
            prev = Some((file.clone(), rec.sect_id.clone(), sid));
        }
        Ok(d)
    }

    pub fn build_linguistic(&mut self, records: &[SentenceRecord], dict: &[DictEntry]) -> Result<GraphDelta> {
        let mut d = GraphDelta::default();
        let mut by_char: BTreeMap<&str, Vec<&DictEntry>> = BTreeMap::new();
        for e in dict {
            by_char.entry(e.han_char.as_str()).or_default().push(e);
        }
        let mut gaps = BTreeSet::new();
        let mut audits: BTreeMap<String, Vec<Value>> = BTreeMap::new();

        for rec in records {
            let cid = rec.id().to_string();
            let sid = node_id(C::Sentence, &cid);
            let han = self.node(&mut d, C::HanSentence, &cid, attrs([("text", json!(rec.han_text))]))?;
            let hv = self.node(&mut d, C::HanvietSentence, &cid, attrs([("text", json!(rec.hanviet_text))]))?;
            let vi = self.node(&mut d, C::VietnameseSentence, &cid, attrs([("text", json!(rec.viet_text))]))?;
            self.edge(&mut d, Edge::new(&sid, &han, R::HasHanForm))?;
            self.edge(&mut d, Edge::new(&sid, &hv, R::HasHanvietForm))?;
            self.edge(&mut d, Edge::new(&sid, &vi, R::HasVietnameseTranslation))?;

            let context = join([rec.han_text.as_str(), rec.viet_text.as_str()]);
            for word in han_words(&rec.han_text) {
                let entries = by_char.get(word.as_str());
                let w = self.node(
                    &mut d,
                    C::HanWord,
                    &word,
                    attrs([("text", json!(word)), ("in_dictionary", json!(entries.is_some()))]),
                )?;
                self.edge(&mut d, Edge::new(&w, &han, R::AppearsIn))?;
                let Some(entries) = entries else {
                    gaps.insert(word);
                    continue;
                };
                // Candidate senses across every reading of the character.
                let cands: Vec<(&str, &str)> = entries
                    .iter()
                    .flat_map(|e| e.viet_meanings.iter().map(move |m| (e.hanviet_reading.as_str(), m.as_str())))
                    .collect();
                let (reading, meaning) = match cands.len() {
                    0 => {
                        let r = entries[0].hanviet_reading.as_str();
                        (r, None)
                    }
                    1 => (cands[0].0, Some(cands[0].1)),
                    _ => {
                        let texts: Vec<String> = cands.iter().map(|(_, m)| m.to_string()).collect();
                        let res = resolve_sense(&word, &texts, &context, self.embedder)?;
                        audits.entry(w.clone()).or_default().push(json!({
                            "sentence": cid,
                            "chosen": res.chosen,
                            "score": res.score,
                            "scores": res.scores,
                        }));
                        (cands[res.chosen_index].0, Some(cands[res.chosen_index].1))
                    }
                };
                let p = self.node(&mut d, C::HanvietPronunciation, reading, attrs([("text", json!(reading))]))?;
                self.edge(&mut d, Edge::new(&w, &p, R::PronouncedAs))?;
                if let Some(m) = meaning {
                    let mid = self.node(&mut d, C::VietnameseMeaning, m, attrs([("text", json!(m))]))?;
                    self.edge(&mut d, Edge::new(&w, &mid, R::TranslatesTo))?;
                }
            }
        }
        for (w, list) in audits {
            if let Some(n) = self.graph.node_mut(&w) {
                n.attrs.insert("sense_audit".into(), Value::Array(list));
            }
        }
        d.gaps = gaps.into_iter().collect();
        Ok(d)
    }

    /// Concept nodes, RELATED_TO within categories, EXPRESSES_CONCEPT per hit
    /// and CO_OCCURS_WITH from sentence-level co-occurrence.
    pub fn build_conceptual(&mut self, taxonomy: &[ConceptDef], records: &[SentenceRecord]) -> Result<GraphDelta> {
        let mut d = GraphDelta::default();
        for c in taxonomy {
            self.node(
                &mut d,
                C::PhilosophicalConcept,
                &c.character,
                attrs([
                    ("text", json!(c.character)),
                    ("english", json!(c.english)),
                    ("vietnamese", json!(c.vietnamese)),
                    ("category", json!(c.category)),
                ]),
            )?;
        }
        for (i, a) in taxonomy.iter().enumerate() {
            for b in &taxonomy[i + 1..] {
                if a.category == b.category {
                    let e = Edge::new(
                        node_id(C::PhilosophicalConcept, &a.character),
                        node_id(C::PhilosophicalConcept, &b.character),
                        R::RelatedTo,
                    );
                    self.edge(&mut d, e)?;
                }
            }
        }

        let mut per_sentence: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let hits: Vec<ConceptHit> = records
            .iter()
            .flat_map(|r| extract_concepts(&r.han_text, &r.id().to_string(), taxonomy))
            .collect();
        for h in &hits {
            per_sentence
                .entry(h.sentence_id.clone())
                .or_default()
                .insert(h.concept.character.clone());
            let e = Edge::new(
                node_id(C::Sentence, &h.sentence_id),
                node_id(C::PhilosophicalConcept, &h.concept.character),
                R::ExpressesConcept,
            )
            .weighted(h.count as f64);
            self.edge(&mut d, e)?;
        }
        for ((a, b), n) in cooccurrence(&per_sentence).counts {
            let e = Edge::new(
                node_id(C::PhilosophicalConcept, &a),
                node_id(C::PhilosophicalConcept, &b),
                R::CoOccursWith,
            )
            .weighted(n as f64);
            self.edge(&mut d, e)?;
        }
        Ok(d)
    }

    /// `chunks` maps commentary ids to their chunk lists.
    pub fn build_commentary(
        &mut self,
        comms: &[CommentaryRecord],
        chunks: &BTreeMap<String, Vec<Chunk>>,
        records: &[SentenceRecord],
    ) -> Result<GraphDelta> {
        let mut d = GraphDelta::default();
        let mut queue_candidates = Vec::new();

        for c in comms {
            let ex = self.node(&mut d, C::Expert, &c.expert_name, attrs([("name", json!(c.expert_name))]))?;
            let cm = self.node(
                &mut d,
                C::Commentary,
                &c.commentary_id,
                attrs([
                    ("text", json!(c.text)),
                    ("sect_id", json!(c.sect_id)),
                    ("expert", json!(c.expert_name)),
                ]),
            )?;
            self.edge(&mut d, Edge::new(&ex, &cm, R::ProvidesCommentary))?;

            let sections = self.sections.get(&c.sect_id).cloned().unwrap_or_default();
            if sections.is_empty() {
                d.flags.push(ValidationFlag::DanglingSection {
                    commentary_id: c.commentary_id.clone(),
                    sect_id: c.sect_id.clone(),
                });
            }
            let mut books = BTreeSet::new();
            for s in &sections {
                self.edge(&mut d, Edge::new(&cm, s, R::Explains))?;
                if let Some(f) = self.graph.node(s).and_then(|n| n.attr_str("file_id")) {
                    books.insert(f.to_string());
                }
            }
            let targets: Vec<String> = records
                .iter()
                .filter(|r| match self.config.context_scope {
                    ContextScope::Corpus => true,
                    ContextScope::Book => books.contains(&r.file_id),
                })
                .map(sentence_node_id)
                .collect();

            let mut prev: Option<String> = None;
            for (i, ch) in chunks.get(&c.commentary_id).into_iter().flatten().enumerate() {
                let chid = self.node(
                    &mut d,
                    C::CommentaryChunk,
                    &format!("{}#{i}", c.commentary_id),
                    attrs([
                        ("text", json!(ch.text)),
                        ("commentary_id", json!(c.commentary_id)),
                        ("span", json!(ch.span)),
                        ("token_count", json!(ch.token_count)),
                        ("method", json!(ch.method)),
                    ]),
                )?;
                self.edge(&mut d, Edge::new(&cm, &chid, R::Contains))?;
                if let Some(p) = &prev {
                    self.edge(&mut d, Edge::new(p, &chid, R::Follows))?;
                }
                prev = Some(chid.clone());

                let cv = self.vector(&chid)?;
                if cv.is_degenerate() {
                    continue;
                }
                for t in &targets {
                    let tv = self.vector(t)?;
                    if tv.is_degenerate() {
                        continue;
                    }
                    let cos = cosine(&cv, &tv)?;
                    if cos >= self.config.context_threshold {
                        let e = Edge::new(&chid, t, R::Contextualizes).weighted(cos);
                        if self.graph.add_edge_once(e)? {
                            d.edges += 1;
                            queue_candidates.push(VerificationItem {
                                src: chid.clone(),
                                dst: t.clone(),
                                relation: R::Contextualizes,
                                weight: Some(cos),
                            });
                        }
                    }
                }
            }
        }

        let n = (queue_candidates.len() as f64 * self.config.verification_rate).ceil() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.verification_seed);
        let mut picked = rand::seq::index::sample(&mut rng, queue_candidates.len(), n.min(queue_candidates.len())).into_vec();
        picked.sort_unstable();
        self.graph.header.verification_queue = picked.into_iter().map(|i| queue_candidates[i].clone()).collect();
        Ok(d)
    }

    pub fn build_speaker(&mut self, records: &[SentenceRecord], patterns: &[SpeakerPattern]) -> Result<GraphDelta> {
        let mut d = GraphDelta::default();
        for rec in records {
            let han = node_id(C::HanSentence, &rec.id().to_string());
            for hit in detect_speakers(&rec.han_text, patterns) {
                let sp = self.node(&mut d, C::Speaker, &hit.speaker_name, attrs([("name", json!(hit.speaker_name))]))?;
                self.edge(&mut d, Edge::new(&sp, &han, R::Quotes))?;
            }
        }
        Ok(d)
    }

    pub fn build_semantic(&mut self) -> Result<GraphDelta> {
        let mut d = GraphDelta::default();
        let mut sources: Vec<String> = self
            .graph
            .nodes()
            .iter()
            .filter(|n| self.config.embed_classes.contains(&n.entity_class))
            .map(|n| n.id.clone())
            .collect();
        sources.sort();

        let mut embs: Vec<(String, EmbeddingVector)> = Vec::with_capacity(sources.len());
        for src in &sources {
            let v = self.vector(src)?;
            let mut a = attrs([("source", json!(src)), ("vector", json!(v.values()))]);
            if v.is_degenerate() {
                a.insert("degenerate".into(), json!(true));
            }
            let eid = self.node(&mut d, C::Embedding, src, a)?;
            self.edge(&mut d, Edge::new(src, &eid, R::HasSemanticRep))?;
            embs.push((eid, v));
        }
        let live: Vec<&(String, EmbeddingVector)> = embs.iter().filter(|(_, v)| !v.is_degenerate()).collect();

        for (id, nbrs) in top_k_neighbours(&live, self.config.top_k, self.config.sim_min)? {
            for (j, cos) in nbrs {
                self.edge(&mut d, Edge::new(id, &live[j].0, R::SimilarTo).weighted(cos))?;
            }
        }

        let items: Vec<(String, EmbeddingVector)> = live.iter().map(|&p| p.clone()).collect();
        for c in cluster(&items, self.config.cluster_threshold)? {
            let cid = self.node(
                &mut d,
                C::SemanticCluster,
                &c.cluster_id.to_string(),
                attrs([("size", json!(c.member_ids.len())), ("leader", json!(c.leader_id))]),
            )?;
            for m in &c.member_ids {
                let v = &self.vectors[self.graph.node(m).and_then(|n| n.attr_str("source")).unwrap_or_default()];
                let w = cosine(v, &c.centroid)?;
                self.edge(&mut d, Edge::new(m, &cid, R::BelongsToCluster).weighted(w))?;
            }
        }
        Ok(d)
    }
}

/// For each item, up to `k` other items with cosine `>= min`, ordered by
/// cosine descending then id ascending.
pub fn top_k_neighbours<'v>(
    items: &[&'v (String, EmbeddingVector)],
    k: usize,
    min: f64,
) -> Result<Vec<(&'v str, Vec<(usize, f64)>)>> {
    let mut out = Vec::with_capacity(items.len());
    for (i, (id, v)) in items.iter().map(|p| (&p.0, &p.1)).enumerate() {
        let mut cands = Vec::new();
        for (j, other) in items.iter().enumerate() {
            if i == j {
                continue;
            }
            let cos = cosine(v, &other.1)?;
            if cos >= min {
                cands.push((j, cos));
            }
        }
        cands.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| items[a.0].0.cmp(&items[b.0].0)));
        cands.truncate(k);
        out.push((id.as_str(), cands));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chunking::ChunkMethod;
    use crate::embedding::HashEmbedder;

    fn rec(file: &str, sect: &str, page: u32, sent: u32, han: &str) -> SentenceRecord {
        SentenceRecord {
            file_id: file.into(),
            sect_id: sect.into(),
            page_id: page,
            sent_id: sent,
            han_text: han.into(),
            hanviet_text: format!("hv {han}"),
            viet_text: format!("vi {han}"),
        }
    }

    fn dict(ch: &str, reading: &str, meanings: &[&str]) -> DictEntry {
        DictEntry {
            entry_id: format!("{ch}-{reading}"),
            han_char: ch.into(),
            hanviet_reading: reading.into(),
            viet_meanings: meanings.iter().map(|m| m.to_string()).collect(),
            source_book: "LY".into(),
            source_chapter: "1".into(),
        }
    }

    fn count(g: &Graph, r: R) -> usize {
        g.edges_of(r).count()
    }

    #[test]
    fn textual_hand_enumeration() {
        let e = HashEmbedder::default();
        let mut b = GraphBuilder::new(BuildConfig::default(), &e);
        let recs: Vec<_> = (1..=3).map(|i| rec("LY", "1.1", 1, i, "學而時習之")).collect();
        b.build_textual(&recs).unwrap();
        let g = b.finish();
        assert_eq!(g.node_count(), 9);
        assert_eq!(count(&g, R::Contains), 8);
        assert_eq!(count(&g, R::Follows), 2);
    }

    #[test]
    fn textual_empty_and_section_boundary() {
        let e = HashEmbedder::default();
        let mut b = GraphBuilder::new(BuildConfig::default(), &e);
        b.build_textual(&[]).unwrap();
        assert_eq!(b.graph().node_count(), 2);
        let recs = [rec("LY", "1.1", 1, 1, "甲"), rec("LY", "1.2", 1, 1, "乙")];
        b.build_textual(&recs).unwrap();
        assert_eq!(count(b.graph(), R::Follows), 0);
    }

    #[test]
    fn linguistic_counts() {
        let e = HashEmbedder::default();
        let mut b = GraphBuilder::new(BuildConfig::default(), &e);
        let recs = [rec("LY", "1.1", 1, 1, "學而時習"), rec("LY", "1.1", 1, 2, "學也。")];
        let d = [
            dict("學", "học", &["học"]),
            dict("而", "nhi", &["mà"]),
            dict("時", "thời", &["thời"]),
            dict("習", "tập", &["tập"]),
        ];
        b.build_textual(&recs).unwrap();
        let delta = b.build_linguistic(&recs, &d).unwrap();
        assert_eq!(delta.gaps, ["也"]);
        let g = b.finish();
        assert_eq!(g.nodes_of(C::HanWord).count(), 5);
        // 4 + 2 distinct ideographs; the full stop is not a word
        assert_eq!(count(&g, R::AppearsIn), 6);
        assert_eq!(count(&g, R::PronouncedAs), 4);
        assert_eq!(count(&g, R::TranslatesTo), 4);
        for c in [C::HanSentence, C::HanvietSentence, C::VietnameseSentence] {
            assert_eq!(g.nodes_of(c).count(), 2);
        }
    }

    #[test]
    fn polysemy_records_audit() {
        let e = HashEmbedder::default();
        let mut b = GraphBuilder::new(BuildConfig::default(), &e);
        let mut r = rec("LY", "1.1", 1, 1, "樂");
        r.viet_text = "âm nhạc lễ nhạc".into();
        let d = [dict("樂", "lạc", &["vui vẻ"]), dict("樂", "nhạc", &["âm nhạc"])];
        b.build_textual(std::slice::from_ref(&r)).unwrap();
        b.build_linguistic(std::slice::from_ref(&r), &d).unwrap();
        let g = b.finish();
        assert!(g.has_edge("HAN_WORD:樂", "VIETNAMESE_MEANING:âm nhạc", R::TranslatesTo));
        assert!(g.has_edge("HAN_WORD:樂", "HANVIET_PRONUNCIATION:nhạc", R::PronouncedAs));
        let audit = &g.node("HAN_WORD:樂").unwrap().attrs["sense_audit"];
        assert_eq!(audit[0]["scores"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn conceptual_layer() {
        let e = HashEmbedder::default();
        let tax = crate::extraction::default_taxonomy();
        let mut b = GraphBuilder::new(BuildConfig::default(), &e);
        b.build_conceptual(&tax, &[]).unwrap();
        let g = b.graph();
        assert_eq!(g.nodes_of(C::PhilosophicalConcept).count(), 23);
        // C(5,2)+C(3,2)+1+1+C(4,2)+C(3,2)+C(4,2)
        assert_eq!(count(g, R::RelatedTo), 10 + 3 + 1 + 1 + 6 + 3 + 6);
        assert_eq!(count(g, R::ExpressesConcept), 0);

        let recs = [rec("LY", "1.1", 1, 1, "仁者愛人仁也禮")];
        let mut b = GraphBuilder::new(BuildConfig::default(), &e);
        b.build_textual(&recs).unwrap();
        b.build_conceptual(&tax, &recs).unwrap();
        let g = b.finish();
        let ren: Vec<_> = g
            .edges_of(R::ExpressesConcept)
            .filter(|e| e.dst == "PHILOSOPHICAL_CONCEPT:仁")
            .collect();
        assert_eq!(ren.len(), 1);
        assert_eq!(ren[0].weight, Some(2.0));
        let co: Vec<_> = g.edges_of(R::CoOccursWith).collect();
        assert_eq!(co.len(), 1);
        assert_eq!(co[0].weight, Some(1.0));
    }

    fn chunk(src: &str, text: &str) -> Chunk {
        Chunk {
            source_id: src.into(),
            span: [0, 0],
            text: text.into(),
            token_count: text.chars().count(),
            method: ChunkMethod::Adaptive,
            overlap_bytes: 0,
        }
    }

    #[test]
    fn commentary_contextualizes_one_sentence() {
        let e = HashEmbedder::default();
        let mut b = GraphBuilder::new(BuildConfig::default(), &e);
        let recs = [
            rec("LY", "1.1", 1, 1, "學而時習之不亦說乎"),
            rec("LY", "1.1", 1, 2, "有朋自遠方來"),
        ];
        b.build_textual(&recs).unwrap();
        let target = b.vector("SENTENCE:LY.1-1.1.1").unwrap();
        let text = embedding_text(b.graph().node("SENTENCE:LY.1-1.1.1").unwrap());
        let cv = e.embed(&text, EmbedMode::Passage).unwrap();
        let other = b.vector("SENTENCE:LY.1-1.1.2").unwrap();
        assert!(cosine(&cv, &other).unwrap() < 0.75);

        let comms = [
            CommentaryRecord {
                commentary_id: "c1".into(),
                expert_name: "Chu Hi".into(),
                sect_id: "1.1".into(),
                text: text.clone(),
            },
            CommentaryRecord {
                commentary_id: "c2".into(),
                expert_name: "Chu Hi".into(),
                sect_id: "9.9".into(),
                text: "xyz".into(),
            },
        ];
        let mut chunks = BTreeMap::new();
        chunks.insert("c1".to_string(), vec![chunk("c1", &text)]);
        chunks.insert("c2".to_string(), vec![chunk("c2", "xyz"), chunk("c2", "abc")]);
        let d = b.build_commentary(&comms, &chunks, &recs).unwrap();
        assert_eq!(d.flags.len(), 1);
        let g = b.finish();
        assert_eq!(g.nodes_of(C::Expert).count(), 1);
        assert_eq!(count(&g, R::ProvidesCommentary), 2);
        assert_eq!(count(&g, R::Explains), 1);
        assert_eq!(count(&g, R::Follows), 2);
        let ctx: Vec<_> = g.edges_of(R::Contextualizes).collect();
        assert_eq!(ctx.len(), 1);
        assert_eq!(ctx[0].dst, "SENTENCE:LY.1-1.1.1");
        assert_eq!(ctx[0].weight, Some(cosine(&cv, &target).unwrap()));
        assert!(!ctx[0].verified);
        assert_eq!(g.header.verification_queue.len(), 1);
    }

    #[test]
    fn speaker_layer() {
        let e = HashEmbedder::default();
        let mut b = GraphBuilder::new(BuildConfig::default(), &e);
        let recs = [
            rec("LY", "1.1", 1, 1, "子曰學而時習之"),
            rec("LY", "1.1", 1, 2, "曾子曰吾日三省吾身"),
            rec("LY", "1.1", 1, 3, "子曰巧言令色"),
            rec("LY", "1.1", 1, 4, "有朋自遠方來"),
        ];
        b.build_textual(&recs).unwrap();
        b.build_linguistic(&recs, &[]).unwrap();
        b.build_speaker(&recs, &crate::extraction::default_speakers()).unwrap();
        let g = b.finish();
        assert_eq!(g.nodes_of(C::Speaker).count(), 2);
        let q: Vec<_> = g.edges_of(R::Quotes).map(|e| (e.src.as_str(), e.dst.as_str())).collect();
        assert_eq!(
            q,
            [
                ("SPEAKER:Confucius", "HAN_SENTENCE:LY.1-1.1.1"),
                ("SPEAKER:Zengzi", "HAN_SENTENCE:LY.1-1.1.2"),
                ("SPEAKER:Confucius", "HAN_SENTENCE:LY.1-1.1.3"),
            ]
        );
    }

    #[test]
    fn semantic_identical_and_distinct() {
        let e = HashEmbedder::default();
        let mut b = GraphBuilder::new(
            BuildConfig {
                embed_classes: vec![C::VietnameseSentence],
                ..BuildConfig::default()
            },
            &e,
        );
        let mut recs = vec![rec("LY", "1.1", 1, 1, "甲"), rec("LY", "1.1", 1, 2, "乙"), rec("LY", "1.1", 1, 3, "丙")];
        recs[0].viet_text = "same text here".into();
        recs[1].viet_text = "same text here".into();
        recs[2].viet_text = "entirely different words".into();
        b.build_textual(&recs).unwrap();
        b.build_linguistic(&recs, &[]).unwrap();
        b.build_semantic().unwrap();
        let g = b.finish();
        let sim: Vec<_> = g.edges_of(R::SimilarTo).collect();
        assert_eq!(sim.len(), 2);
        assert!(sim.iter().all(|e| (e.weight.unwrap() - 1.0).abs() < 1e-12));
        assert_eq!(g.nodes_of(C::SemanticCluster).count(), 2);
        assert_eq!(count(&g, R::BelongsToCluster), 3);
        assert_eq!(count(&g, R::HasSemanticRep), 3);
    }
}
