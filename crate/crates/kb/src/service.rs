//! Curation operations over extracted candidates: entity search, relation
//! browsing, ranked candidate lists, decisions and provenance.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use chrono::NaiveDate;
use econ_events::corpus::{segment_sentences, CorpusReader, Document};
use econ_events::entities::EntityRepository;
use econ_events::events::{EventCandidates, EventKey};
use econ_events::learning::{ForestModel, LearningError};
use econ_events::ontology::Ontology;
use econ_events::selection::{earliest_order, pair_key, score_event, select_baseline, select_supervised, Method};
use serde::{Deserialize, Serialize};

use crate::store::{Action, KbRecord, Status, Store, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Model(#[from] LearningError),
    #[error("no event {0}")]
    UnknownEvent(String),
    #[error("corpus {path}: {reason}")]
    Corpus { path: String, reason: String },
}

/// Builds one pending record per candidate. Confidence is the supervised
/// score when a model is given; otherwise baseline picks get 1.0 and every
/// other candidate 0.0.
pub fn initial_records(
    events: &[EventCandidates],
    model: Option<&ForestModel>,
    gamma: f64,
) -> Result<Vec<KbRecord>, LearningError> {
    if let Some(m) = model {
        m.check_candidate_schema()?;
    }
    let mut out = Vec::new();
    for event in events {
        let cands = &event.candidates;
        let mut methods: HashMap<&str, Vec<Method>> = HashMap::new();
        for m in [Method::Earliest, Method::Latest, Method::Frequent] {
            if let Some(c) = select_baseline(m, cands) {
                methods.entry(&c.candidate_id).or_default().push(m);
            }
        }
        let scores = match model {
            Some(model) => {
                if let Some((c, _)) = select_supervised(cands, model, gamma)? {
                    methods.entry(&c.candidate_id).or_default().push(Method::Supervised);
                }
                score_event(cands, model)?
            }
            None => cands
                .iter()
                .map(|c| {
                    if methods.contains_key(c.candidate_id.as_str()) {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect(),
        };
        for (c, score) in cands.iter().zip(scores) {
            let key = pair_key(c);
            let mut provenance: Vec<(NaiveDate, &str)> = cands
                .iter()
                .filter(|o| pair_key(o) == key)
                .map(|o| (o.published, o.sentence_id.as_str()))
                .collect();
            provenance.sort_unstable();
            provenance.dedup();
            out.push(KbRecord {
                record_id: c.candidate_id.clone(),
                event_key: event.key.id(),
                quintuple: c.clone(),
                confidence: score,
                methods: methods.get(c.candidate_id.as_str()).cloned().unwrap_or_default(),
                status: Status::Pending,
                provenance: provenance.into_iter().map(|(_, s)| s.to_string()).collect(),
                decided_at: None,
                decided_by: None,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntitySummary {
    pub entity_id: String,
    pub name: String,
    pub surface_forms: Vec<String>,
    pub has_description: bool,
    pub uris: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSummary {
    pub object_id: String,
    pub name: String,
    pub event_key: String,
    pub best_confidence: f64,
    pub candidates: usize,
    /// record id of the accepted candidate, if any
    pub accepted: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceSentence {
    pub sentence_id: String,
    pub doc_id: String,
    pub title: String,
    pub published: NaiveDate,
    pub text: String,
    /// byte span of the sentence in the document body
    pub char_span: (usize, usize),
    /// byte spans within `text` of the value and, if stated, the date
    pub highlights: Vec<(usize, usize)>,
}

pub struct KbService {
    store: Store,
    entities: EntityRepository,
    ontology: Ontology,
    corpus: PathBuf,
}

/// Descending confidence, then the earliest-baseline order.
fn rank(a: &KbRecord, b: &KbRecord) -> Ordering {
    b.confidence
        .total_cmp(&a.confidence)
        .then_with(|| earliest_order(&a.quintuple, &b.quintuple))
        .then_with(|| a.record_id.cmp(&b.record_id))
}

impl KbService {
    pub fn new(store: Store, entities: EntityRepository, ontology: Ontology, corpus: impl Into<PathBuf>) -> Self {
        KbService {
            store,
            entities,
            ontology,
            corpus: corpus.into(),
        }
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn search_entities(&self, prefix: &str, limit: usize) -> Vec<EntitySummary> {
        self.entities
            .search_prefix(prefix, limit)
            .into_iter()
            .map(|r| EntitySummary {
                entity_id: r.entity_id.clone(),
                name: r.canonical_name.clone(),
                surface_forms: r.surface_forms.iter().cloned().collect(),
                has_description: r.has_description,
                uris: r.uris.iter().cloned().collect(),
            })
            .collect()
    }

    pub fn relations(&self) -> Vec<String> {
        self.ontology
            .predicate_classes()
            .into_iter()
            .map(str::to_string)
            .collect()
    }

    /// Objects related to `subject` by `relation`, best confidence first. The
    /// relation may be a class or any predicate below it.
    pub fn query_objects(&self, subject: &str, relation: &str) -> Vec<ObjectSummary> {
        let class = self
            .ontology
            .second_level_ancestor(relation)
            .map(str::to_string)
            .unwrap_or_else(|_| relation.to_string());
        let mut out = Vec::new();
        for key in self.store.event_keys() {
            let Some(parsed) = EventKey::parse_id(&key) else {
                continue;
            };
            if parsed.subject_id != subject || parsed.predicate_class != class {
                continue;
            }
            let records = self.store.event_records(&key).unwrap_or_default();
            let best = records.iter().map(|r| r.confidence).fold(0.0, f64::max);
            out.push(ObjectSummary {
                name: self
                    .entities
                    .get(&parsed.object_id)
                    .map_or_else(|| parsed.object_id.clone(), |e| e.canonical_name.clone()),
                object_id: parsed.object_id,
                event_key: key,
                best_confidence: best,
                candidates: records.len(),
                accepted: records
                    .iter()
                    .find(|r| r.status == Status::Accepted)
                    .map(|r| r.record_id.clone()),
            });
        }
        out.sort_by(|a, b| {
            b.best_confidence
                .total_cmp(&a.best_confidence)
                .then_with(|| a.object_id.cmp(&b.object_id))
        });
        out
    }

    pub fn list_candidates(&self, event_key: &str) -> Result<Vec<KbRecord>, ServiceError> {
        let mut records = self
            .store
            .event_records(event_key)
            .ok_or_else(|| ServiceError::UnknownEvent(event_key.to_string()))?;
        records.sort_by(rank);
        Ok(records)
    }

    pub fn decide(&self, record_id: &str, action: Action, curator: &str) -> Result<KbRecord, ServiceError> {
        Ok(self.store.decide(record_id, action, curator)?)
    }

    /// Source sentences of a record, oldest first. The corpus is read on
    /// demand; failing to read it leaves the record untouched.
    pub fn provenance(&self, record_id: &str) -> Result<Vec<ProvenanceSentence>, ServiceError> {
        let record = self
            .store
            .get(record_id)
            .ok_or_else(|| StoreError::NotFound(record_id.to_string()))?;
        let siblings = self.store.event_records(&record.event_key).unwrap_or_default();
        let wanted: BTreeMap<&str, &KbRecord> = record
            .provenance
            .iter()
            .map(|sid| {
                let source = siblings
                    .iter()
                    .filter(|s| {
                        &s.quintuple.sentence_id == sid && pair_key(&s.quintuple) == pair_key(&record.quintuple)
                    })
                    .min_by(|a, b| earliest_order(&a.quintuple, &b.quintuple))
                    .unwrap_or(&record);
                (sid.as_str(), source)
            })
            .collect();
        let docs = self.read_documents(wanted.values().map(|r| r.quintuple.doc_id.as_str()).collect())?;
        let mut out = Vec::new();
        for (sid, source) in wanted {
            let q = &source.quintuple;
            let doc = docs
                .get(q.doc_id.as_str())
                .ok_or_else(|| self.corpus_error(format!("document {} is missing", q.doc_id)))?;
            let sentence = segment_sentences(doc)
                .into_iter()
                .find(|s| s.sentence_id == sid)
                .ok_or_else(|| self.corpus_error(format!("sentence {sid} is missing")))?;
            let mut highlights = vec![q.value.char_span];
            highlights.extend(q.date_span);
            out.push(ProvenanceSentence {
                sentence_id: sentence.sentence_id,
                doc_id: doc.doc_id.clone(),
                title: doc.title.clone(),
                published: doc.publication_date,
                text: sentence.text,
                char_span: sentence.char_span,
                highlights,
            });
        }
        out.sort_by(|a, b| (a.published, &a.sentence_id).cmp(&(b.published, &b.sentence_id)));
        Ok(out)
    }

    fn corpus_error(&self, reason: String) -> ServiceError {
        ServiceError::Corpus {
            path: self.corpus.display().to_string(),
            reason,
        }
    }

    fn read_documents(&self, ids: Vec<&str>) -> Result<HashMap<String, Document>, ServiceError> {
        let file = File::open(&self.corpus).map_err(|e| self.corpus_error(e.to_string()))?;
        let mut out = HashMap::new();
        for doc in CorpusReader::new(BufReader::new(file)).flatten() {
            if ids.contains(&doc.doc_id.as_str()) {
                out.insert(doc.doc_id.clone(), doc);
                if out.len() == ids.len() {
                    break;
                }
            }
        }
        Ok(out)
    }
}
