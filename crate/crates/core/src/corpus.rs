//! Parsing, normalization and identification of the three corpus components:
//! the tri-parallel main text, the dictionary and the expert commentary.
//!
//! All three are read from line-delimited JSON (one object per line). The
//! dictionary can also be imported from a delimited table.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::text::{is_cjk, is_terminal};

pub const MAIN_TEXT_FILE: &str = "main_text.jsonl";
pub const DICTIONARY_FILE: &str = "dictionary.jsonl";
pub const COMMENTARY_FILE: &str = "commentary.jsonl";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: missing field `{field}`")]
    MissingField { line: usize, field: &'static str },
    #[error("duplicate sentence id {0}")]
    DuplicateId(String),
    #[error("sentence {id}: empty {layer} layer")]
    EmptyLayer { id: String, layer: &'static str },
    #[error("line {line}: empty character field")]
    EmptyCharacter { line: usize },
    #[error("bad corpus id `{0}`")]
    BadFormat(String),
    #[error("invalid strip pattern: {0}")]
    Pattern(#[from] regex::Error),
}

pub type Result<T, E = CorpusError> = std::result::Result<T, E>;

// ── Identifiers ──────────────────────────────────────────────────────────────

/// Hierarchical sentence identifier, rendered as `File.Sect.Page.STC`.
///
/// Section identifiers may not contain the `.` separator; [`CorpusId::new`]
/// re-encodes any dots in the section as `-`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CorpusId {
    pub file: String,
    pub sect: String,
    pub page: u32,
    pub stc: u32,
}

impl CorpusId {
    pub fn new(file: &str, sect: &str, page: u32, stc: u32) -> Result<Self> {
        let bad = || CorpusError::BadFormat(format!("{file}|{sect}|{page}|{stc}"));
        if file.is_empty() || file.contains('.') || sect.is_empty() || page == 0 || stc == 0 {
            return Err(bad());
        }
        Ok(Self {
            file: file.to_string(),
            sect: encode_sect(sect),
            page,
            stc,
        })
    }
}

/// Section id with the id separator replaced.
pub fn encode_sect(sect: &str) -> String {
    sect.replace('.', "-")
}

pub fn make_id(file: &str, sect: &str, page: u32, stc: u32) -> Result<CorpusId> {
    CorpusId::new(file, sect, page, stc)
}

pub fn parse_id(s: &str) -> Result<CorpusId> {
    s.parse()
}

impl fmt::Display for CorpusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}.{}", self.file, self.sect, self.page, self.stc)
    }
}

impl FromStr for CorpusId {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || CorpusError::BadFormat(s.to_string());
        let parts: Vec<&str> = s.split('.').collect();
        let [file, sect, page, stc] = parts.as_slice() else {
            return Err(bad());
        };
        let page: u32 = page.parse().map_err(|_| bad())?;
        let stc: u32 = stc.parse().map_err(|_| bad())?;
        CorpusId::new(file, sect, page, stc).map_err(|_| bad())
    }
}

// ── Records ──────────────────────────────────────────────────────────────────

/// One aligned sentence of the main text: Classical Chinese, Sino-Vietnamese
/// reading and modern Vietnamese translation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub file_id: String,
    pub sect_id: String,
    pub page_id: u32,
    pub sent_id: u32,
    #[serde(rename = "han")]
    pub han_text: String,
    #[serde(rename = "hanviet")]
    pub hanviet_text: String,
    #[serde(rename = "viet")]
    pub viet_text: String,
}

impl SentenceRecord {
    pub fn id(&self) -> CorpusId {
        CorpusId {
            file: self.file_id.clone(),
            sect: encode_sect(&self.sect_id),
            page: self.page_id,
            stc: self.sent_id,
        }
    }

    fn sort_key(&self) -> (&str, &str, u32, u32) {
        (&self.file_id, &self.sect_id, self.page_id, self.sent_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictEntry {
    pub entry_id: String,
    #[serde(rename = "char")]
    pub han_char: String,
    #[serde(rename = "reading")]
    pub hanviet_reading: String,
    #[serde(rename = "meanings")]
    pub viet_meanings: Vec<String>,
    #[serde(rename = "book")]
    pub source_book: String,
    #[serde(rename = "chapter")]
    pub source_chapter: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentaryRecord {
    pub commentary_id: String,
    #[serde(rename = "expert")]
    pub expert_name: String,
    pub sect_id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ValidationFlag {
    /// Commentary targets a section that does not occur in the main text.
    DanglingSection { commentary_id: String, sect_id: String },
}

#[derive(Debug, Clone, Default)]
pub struct CommentaryParse {
    pub records: Vec<CommentaryRecord>,
    pub flags: Vec<ValidationFlag>,
}

// ── Normalization ────────────────────────────────────────────────────────────

/// Text normalizer: NFC, header/footer line removal, hard-break joining and
/// whitespace collapsing.
#[derive(Debug, Clone, Default)]
pub struct Normalizer {
    strip: Vec<Regex>,
}

impl Normalizer {
    /// `strip_patterns` are matched against each trimmed input line; matching
    /// lines (running headers, page footers) are dropped.
    pub fn new<S: AsRef<str>>(strip_patterns: &[S]) -> Result<Self> {
        let strip = strip_patterns
            .iter()
            .map(|p| Regex::new(p.as_ref()))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Self { strip })
    }

    pub fn normalize(&self, raw: &str) -> String {
        let composed: String = raw.nfc().collect();
        let mut joined = String::with_capacity(composed.len());
        for line in composed.lines().map(str::trim) {
            if line.is_empty() || self.strip.iter().any(|re| re.is_match(line)) {
                continue;
            }
            match (joined.chars().last(), line.chars().next()) {
                (None, _) => {}
                (Some(prev), Some(next)) if !is_terminal(prev) && is_cjk(prev) && is_cjk(next) => {}
                _ => joined.push(' '),
            }
            joined.push_str(line);
        }
        collapse_whitespace(&joined)
    }
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// [`Normalizer::normalize`] with no strip patterns.
pub fn normalize_text(raw: &str) -> String {
    Normalizer::default().normalize(raw)
}

// ── Row helpers ──────────────────────────────────────────────────────────────

fn rows<R: BufRead>(source: R) -> impl Iterator<Item = Result<(usize, Map<String, Value>)>> {
    source.lines().enumerate().filter_map(|(i, line)| {
        let line_no = i + 1;
        let line = match line {
            Ok(l) => l,
            Err(e) => return Some(Err(e.into())),
        };
        if line.trim().is_empty() {
            return None;
        }
        Some(match serde_json::from_str::<Value>(&line) {
            Ok(Value::Object(map)) => Ok((line_no, map)),
            Ok(_) => Err(CorpusError::Malformed {
                line: line_no,
                message: "expected a JSON object".into(),
            }),
            Err(e) => Err(CorpusError::Malformed {
                line: line_no,
                message: e.to_string(),
            }),
        })
    })
}

fn get_str(row: &Map<String, Value>, line: usize, field: &'static str) -> Result<String> {
    match row.get(field) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(Value::Number(n)) => Ok(n.to_string()),
        _ => Err(CorpusError::MissingField { line, field }),
    }
}

fn get_index(row: &Map<String, Value>, line: usize, field: &'static str) -> Result<u32> {
    let malformed = |message: String| CorpusError::Malformed { line, message };
    let n = match row.get(field) {
        Some(Value::Number(n)) => n
            .as_u64()
            .ok_or_else(|| malformed(format!("`{field}` must be a positive integer")))?,
        Some(Value::String(s)) => s
            .trim()
            .parse::<u64>()
            .map_err(|_| malformed(format!("`{field}` must be a positive integer")))?,
        _ => return Err(CorpusError::MissingField { line, field }),
    };
    if n == 0 || n > u32::MAX as u64 {
        return Err(malformed(format!("`{field}` must be >= 1")));
    }
    Ok(n as u32)
}

fn get_meanings(row: &Map<String, Value>, line: usize, norm: &Normalizer) -> Result<Vec<String>> {
    let raw: Vec<String> = match row.get("meanings") {
        Some(Value::Array(items)) => items
            .iter()
            .filter_map(|v| v.as_str().map(str::to_string))
            .collect(),
        Some(Value::String(s)) => s.split(';').map(str::to_string).collect(),
        _ => return Err(CorpusError::MissingField { line, field: "meanings" }),
    };
    let meanings = normalize_meanings(raw.iter().map(String::as_str), norm);
    if meanings.is_empty() {
        return Err(CorpusError::MissingField { line, field: "meanings" });
    }
    Ok(meanings)
}

fn normalize_meanings<'a>(raw: impl Iterator<Item = &'a str>, norm: &Normalizer) -> Vec<String> {
    let mut seen = HashSet::new();
    raw.map(|m| norm.normalize(m))
        .filter(|m| !m.is_empty())
        .filter(|m| seen.insert(m.clone()))
        .collect()
}

// ── Parsers ──────────────────────────────────────────────────────────────────

/// Parse main-text rows into records sorted by `(file, sect, page, sent)`.
pub fn parse_main_text<R: BufRead>(source: R, norm: &Normalizer) -> Result<Vec<SentenceRecord>> {
    let mut records = Vec::new();
    for row in rows(source) {
        let (line, row) = row?;
        let rec = SentenceRecord {
            file_id: get_str(&row, line, "file_id")?,
            sect_id: get_str(&row, line, "sect_id")?,
            page_id: get_index(&row, line, "page_id")?,
            sent_id: get_index(&row, line, "sent_id")?,
            han_text: norm.normalize(&get_str(&row, line, "han")?),
            hanviet_text: norm.normalize(&get_str(&row, line, "hanviet")?),
            viet_text: norm.normalize(&get_str(&row, line, "viet")?),
        };
        if rec.file_id.is_empty() || rec.file_id.contains('.') {
            return Err(CorpusError::BadFormat(rec.file_id));
        }
        if rec.sect_id.is_empty() {
            return Err(CorpusError::MissingField { line, field: "sect_id" });
        }
        for (layer, text) in [
            ("han", &rec.han_text),
            ("hanviet", &rec.hanviet_text),
            ("viet", &rec.viet_text),
        ] {
            if text.is_empty() {
                return Err(CorpusError::EmptyLayer {
                    id: rec.id().to_string(),
                    layer,
                });
            }
        }
        records.push(rec);
    }
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    for pair in records.windows(2) {
        if pair[0].sort_key() == pair[1].sort_key() {
            return Err(CorpusError::DuplicateId(pair[1].id().to_string()));
        }
    }
    Ok(records)
}

/// One entry per input row, meanings normalized. Consolidation is separate.
pub fn parse_dictionary<R: BufRead>(source: R, norm: &Normalizer) -> Result<Vec<DictEntry>> {
    let mut entries = Vec::new();
    for row in rows(source) {
        let (line, row) = row?;
        let entry_id = get_str(&row, line, "entry_id")?;
        let han_char = norm.normalize(&get_str(&row, line, "char")?);
        if han_char.is_empty() {
            return Err(CorpusError::EmptyCharacter { line });
        }
        entries.push(DictEntry {
            entry_id,
            han_char,
            hanviet_reading: norm.normalize(&get_str(&row, line, "reading")?),
            viet_meanings: get_meanings(&row, line, norm)?,
            source_book: get_str(&row, line, "book")?,
            source_chapter: get_str(&row, line, "chapter")?,
        });
    }
    Ok(entries)
}

/// Import shim for spreadsheet exports: a delimited table with a header row
/// naming the same columns as the JSONL form. Meanings are `;`-separated.
pub fn parse_dictionary_table<R: std::io::Read>(
    source: R,
    delimiter: u8,
    norm: &Normalizer,
) -> Result<Vec<DictEntry>> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| CorpusError::Malformed { line: 1, message: e.to_string() })?
        .clone();
    let mut entries = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| CorpusError::Malformed { line, message: e.to_string() })?;
        let mut row = Map::new();
        for (h, v) in headers.iter().zip(record.iter()) {
            row.insert(h.trim().to_string(), Value::String(v.to_string()));
        }
        let han_char = norm.normalize(&get_str(&row, line, "char")?);
        if han_char.is_empty() {
            return Err(CorpusError::EmptyCharacter { line });
        }
        entries.push(DictEntry {
            entry_id: get_str(&row, line, "entry_id")?,
            han_char,
            hanviet_reading: norm.normalize(&get_str(&row, line, "reading")?),
            viet_meanings: get_meanings(&row, line, norm)?,
            source_book: get_str(&row, line, "book")?,
            source_chapter: get_str(&row, line, "chapter")?,
        });
    }
    Ok(entries)
}

/// Merge entries sharing `(character, reading)`.
///
/// Meaning lists are concatenated in first-occurrence order and deduplicated;
/// the surviving entry keeps the id and source of the first row of its group.
pub fn consolidate_dictionary(entries: &[DictEntry]) -> Vec<DictEntry> {
    let mut out: Vec<DictEntry> = Vec::new();
    let mut slot: HashMap<(&str, &str), usize> = HashMap::new();
    for e in entries {
        let key = (e.han_char.as_str(), e.hanviet_reading.as_str());
        match slot.get(&key) {
            Some(&i) => {
                let merged = &mut out[i].viet_meanings;
                for m in &e.viet_meanings {
                    if !merged.contains(m) {
                        merged.push(m.clone());
                    }
                }
            }
            None => {
                slot.insert(key, out.len());
                let mut first = e.clone();
                let mut seen = HashSet::new();
                first.viet_meanings.retain(|m| seen.insert(m.clone()));
                out.push(first);
            }
        }
    }
    out
}

/// Parse commentary rows ordered by section. Rows whose section is absent
/// from `known_sections` are kept and reported with a
/// [`ValidationFlag::DanglingSection`].
pub fn parse_commentary<R: BufRead>(
    source: R,
    norm: &Normalizer,
    known_sections: &BTreeSet<String>,
) -> Result<CommentaryParse> {
    let mut records = Vec::new();
    for row in rows(source) {
        let (line, row) = row?;
        let text = norm.normalize(&get_str(&row, line, "text")?);
        if text.is_empty() {
            return Err(CorpusError::MissingField { line, field: "text" });
        }
        records.push(CommentaryRecord {
            commentary_id: get_str(&row, line, "commentary_id")?,
            expert_name: norm.normalize(&get_str(&row, line, "expert")?),
            sect_id: get_str(&row, line, "sect_id")?,
            text,
        });
    }
    records.sort_by(|a, b| a.sect_id.cmp(&b.sect_id));
    let flags = records
        .iter()
        .filter(|r| !known_sections.contains(&r.sect_id))
        .map(|r| ValidationFlag::DanglingSection {
            commentary_id: r.commentary_id.clone(),
            sect_id: r.sect_id.clone(),
        })
        .collect();
    Ok(CommentaryParse { records, flags })
}

// ── Whole corpus ─────────────────────────────────────────────────────────────

/// The three components loaded from a corpus directory.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub sentences: Vec<SentenceRecord>,
    /// Dictionary rows as parsed, before consolidation.
    pub dictionary_rows: Vec<DictEntry>,
    pub dictionary: Vec<DictEntry>,
    pub commentaries: Vec<CommentaryRecord>,
    pub flags: Vec<ValidationFlag>,
}

impl Corpus {
    /// Load `main_text.jsonl`, `dictionary.jsonl` and `commentary.jsonl` from
    /// `dir`. The dictionary and commentary files are optional.
    pub fn load(dir: &Path, norm: &Normalizer) -> Result<Self> {
        let open = |name: &str| File::open(dir.join(name)).map(BufReader::new);
        let sentences = parse_main_text(open(MAIN_TEXT_FILE)?, norm)?;
        let dictionary_rows = match open(DICTIONARY_FILE) {
            Ok(r) => parse_dictionary(r, norm)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(e.into()),
        };
        let known = sentences.iter().map(|s| s.sect_id.clone()).collect();
        let commentary = match open(COMMENTARY_FILE) {
            Ok(r) => parse_commentary(r, norm, &known)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => CommentaryParse::default(),
            Err(e) => return Err(e.into()),
        };
        Ok(Self::from_parts(sentences, dictionary_rows, commentary))
    }

    pub fn from_parts(
        sentences: Vec<SentenceRecord>,
        dictionary_rows: Vec<DictEntry>,
        commentary: CommentaryParse,
    ) -> Self {
        let dictionary = consolidate_dictionary(&dictionary_rows);
        Self {
            sentences,
            dictionary_rows,
            dictionary,
            commentaries: commentary.records,
            flags: commentary.flags,
        }
    }

    /// Hex SHA-256 over the canonical serialization of all records.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for s in &self.sentences {
            h.update(serde_json::to_vec(s).expect("record serializes"));
            h.update(b"\n");
        }
        for d in &self.dictionary_rows {
            h.update(serde_json::to_vec(d).expect("record serializes"));
            h.update(b"\n");
        }
        for c in &self.commentaries {
            h.update(serde_json::to_vec(c).expect("record serializes"));
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }
}
