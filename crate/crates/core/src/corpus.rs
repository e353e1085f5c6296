//! News documents, sentence segmentation and corpus-wide predicate counts.
//!
//! A corpus file holds one JSON record per line:
//!
//! ```text
//! {"id": "...", "published": "YYYY-MM-DD", "title": "...", "body": "...",
//!  "descriptors": ["Business", ...], "word_count": 812}
//! ```
//!
//! `word_count` is optional; when absent it is the whitespace-token count of
//! the body.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::annotate::predicates::recognize_predicates;
use crate::ontology::Ontology;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub publication_date: NaiveDate,
    pub title: String,
    pub body: String,
    pub descriptors: Vec<String>,
    pub word_count: u64,
}

impl Document {
    pub fn is_business(&self) -> bool {
        self.descriptors
            .iter()
            .any(|d| d.trim().eq_ignore_ascii_case("business"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub sentence_id: String,
    pub doc_id: String,
    pub order_index: usize,
    pub text: String,
    /// Byte offsets into the document body.
    pub char_span: (usize, usize),
}

/// On-disk shape of a corpus line.
#[derive(Debug, Deserialize, Serialize)]
pub struct DocumentRecord {
    pub id: String,
    #[serde(default)]
    pub published: Option<NaiveDate>,
    #[serde(default)]
    pub title: String,
    pub body: String,
    #[serde(default)]
    pub descriptors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word_count: Option<u64>,
}

impl From<&Document> for DocumentRecord {
    fn from(doc: &Document) -> Self {
        DocumentRecord {
            id: doc.doc_id.clone(),
            published: Some(doc.publication_date),
            title: doc.title.clone(),
            body: doc.body.clone(),
            descriptors: doc.descriptors.clone(),
            word_count: Some(doc.word_count),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read corpus {path}: {source}")]
    Unreadable { path: String, source: io::Error },
}

/// Streams documents from any line source. Bad lines come out as `Err`
/// diagnostics and the stream keeps going.
pub struct CorpusReader<R> {
    lines: io::Lines<R>,
    line_no: usize,
    seen: HashSet<String>,
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(reader: R) -> Self {
        CorpusReader {
            lines: reader.lines(),
            line_no: 0,
            seen: HashSet::new(),
        }
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<Document, Diagnostic>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = self.lines.next()?;
            self.line_no += 1;
            let line = match line {
                Ok(l) => l,
                Err(e) => {
                    return Some(Err(Diagnostic {
                        line: self.line_no,
                        message: format!("unreadable line: {e}"),
                    }))
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            return Some(self.parse(&line));
        }
    }
}

impl<R> CorpusReader<R> {
    fn parse(&mut self, line: &str) -> Result<Document, Diagnostic> {
        let diag = |message: String| Diagnostic {
            line: self.line_no,
            message,
        };
        let record: DocumentRecord = serde_json::from_str(line).map_err(|e| diag(format!("malformed record: {e}")))?;
        let Some(published) = record.published else {
            return Err(diag(format!("document {} has no publication date", record.id)));
        };
        if record.id.is_empty() {
            return Err(diag("empty document id".to_string()));
        }
        if !self.seen.insert(record.id.clone()) {
            return Err(diag(format!("duplicate document id {}", record.id)));
        }
        let word_count = record
            .word_count
            .unwrap_or_else(|| record.body.split_whitespace().count() as u64);
        Ok(Document {
            doc_id: record.id,
            publication_date: published,
            title: record.title,
            body: record.body,
            descriptors: record.descriptors,
            word_count,
        })
    }
}

#[derive(Debug, Default)]
pub struct LoadedCorpus {
    pub documents: Vec<Document>,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<LoadedCorpus, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CorpusError::Unreadable {
        path: path.display().to_string(),
        source,
    })?;
    let mut loaded = LoadedCorpus::default();
    for item in CorpusReader::new(BufReader::new(file)) {
        match item {
            Ok(doc) => loaded.documents.push(doc),
            Err(d) => {
                log::warn!("{}: {d}", path.display());
                loaded.diagnostics.push(d);
            }
        }
    }
    Ok(loaded)
}

/// Tokens (lowercased, without the trailing period) that never end a sentence.
const ABBREVIATIONS: &[&str] = &[
    "inc", "corp", "co", "ltd", "llc", "plc", "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "u.s", "u.k", "u.n",
    "e.u", "a.m", "p.m", "no", "vs", "etc", "e.g", "i.e", "jan", "feb", "mar", "apr", "aug", "sept", "sep", "oct",
    "nov", "dec", "gov", "sen", "rep", "gen", "col", "lt", "mt", "ft", "dept", "univ", "assn", "bros", "est", "approx",
];

const CLOSERS: &[char] = &['"', '\'', ')', ']', '\u{201d}', '\u{2019}'];
const OPENERS: &[char] = &['"', '\'', '(', '[', '\u{201c}', '\u{2018}'];

fn is_abbreviation(body: &str, dot: usize) -> bool {
    let word_start = body[..dot]
        .rfind(char::is_whitespace)
        .map(|i| i + body[i..].chars().next().map_or(1, char::len_utf8))
        .unwrap_or(0);
    let word = body[word_start..dot].trim_start_matches(|c: char| OPENERS.contains(&c));
    if word.is_empty() {
        return false;
    }
    let mut chars = word.chars();
    if let (Some(c), None) = (chars.next(), chars.next()) {
        // single initial such as "J."
        if c.is_alphabetic() {
            return true;
        }
    }
    let lower = word.to_lowercase();
    ABBREVIATIONS.contains(&lower.as_str())
}

/// Byte spans of the sentences in `body`, whitespace-trimmed.
pub fn sentence_spans(body: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = 0usize;
    let chars: Vec<(usize, char)> = body.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if matches!(c, '.' | '?' | '!') {
            let mut k = i + 1;
            while k < chars.len() && (CLOSERS.contains(&chars[k].1) || matches!(chars[k].1, '.' | '?' | '!')) {
                k += 1;
            }
            let end = chars.get(k).map_or(body.len(), |&(p, _)| p);
            let mut w = k;
            while w < chars.len() && chars[w].1.is_whitespace() {
                w += 1;
            }
            let has_space = w > k;
            let next = chars.get(w).map(|&(_, ch)| ch);
            let opens = next.is_some_and(|n| n.is_uppercase() || n.is_ascii_digit() || OPENERS.contains(&n));
            let abbrev = c == '.' && is_abbreviation(body, pos);
            if has_space && opens && !abbrev {
                push_trimmed(body, start, end, &mut spans);
                start = end;
                i = w;
                continue;
            }
            i = k;
            continue;
        }
        i += 1;
    }
    push_trimmed(body, start, body.len(), &mut spans);
    spans
}

fn push_trimmed(body: &str, start: usize, end: usize, spans: &mut Vec<(usize, usize)>) {
    let slice = &body[start..end];
    let lead = slice.len() - slice.trim_start().len();
    let trimmed = slice.trim();
    if !trimmed.is_empty() {
        let s = start + lead;
        spans.push((s, s + trimmed.len()));
    }
}

pub fn segment_sentences(doc: &Document) -> Vec<Sentence> {
    sentence_spans(&doc.body)
        .into_iter()
        .enumerate()
        .map(|(order_index, (s, e))| Sentence {
            sentence_id: format!("{}:{}", doc.doc_id, order_index),
            doc_id: doc.doc_id.clone(),
            order_index,
            text: doc.body[s..e].to_string(),
            char_span: (s, e),
        })
        .collect()
}

/// Sentence counts per ontology predicate over a corpus.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PredicateStats {
    pub counts: BTreeMap<String, u64>,
}

impl PredicateStats {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// count(p) / sum of all counts; 0 for unseen predicates.
    pub fn relative_frequency(&self, label: &str) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        self.counts.get(label).copied().unwrap_or(0) as f64 / total as f64
    }
}

/// Number of sentences mentioning each predicate, verb or noun form. A
/// sentence mentioning the same predicate twice counts once.
pub fn corpus_predicate_frequencies(docs: &[Document], ontology: &Ontology) -> PredicateStats {
    let mut stats = PredicateStats::default();
    for doc in docs {
        for sentence in segment_sentences(doc) {
            let mut labels: Vec<String> = recognize_predicates(&sentence.text, ontology, true)
                .into_iter()
                .map(|p| p.label)
                .collect();
            labels.sort();
            labels.dedup();
            for label in labels {
                *stats.counts.entry(label).or_insert(0) += 1;
            }
        }
    }
    stats
}
