//! Events keyed by (subject, predicate class, object) and their candidate
//! quintuples.

use std::collections::BTreeMap;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::annotate::dates::Granularity;
use crate::annotate::money::MonetaryValue;
use crate::annotate::predicates::Tense;
use crate::annotate::AnnotatedSentence;
use crate::entities::KbLinks;
use crate::ontology::{Ontology, OntologyError};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EventKey {
    pub subject_id: String,
    pub predicate_class: String,
    pub object_id: String,
}

/// Separator of the textual event id; never produced by entity slugs or labels.
const KEY_SEPARATOR: char = '~';

impl EventKey {
    pub fn id(&self) -> String {
        format!(
            "{}{KEY_SEPARATOR}{}{KEY_SEPARATOR}{}",
            self.subject_id, self.predicate_class, self.object_id
        )
    }

    pub fn parse_id(id: &str) -> Option<EventKey> {
        let mut parts = id.split(KEY_SEPARATOR);
        let key = EventKey {
            subject_id: parts.next()?.to_string(),
            predicate_class: parts.next()?.to_string(),
            object_id: parts.next()?.to_string(),
        };
        parts.next().is_none().then_some(key)
    }
}

impl fmt::Display for EventKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventGroup {
    pub key: EventKey,
    pub sentences: Vec<AnnotatedSentence>,
}

/// One element of R_e, flattened with the context its features need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateQuintuple {
    pub candidate_id: String,
    pub event_key: EventKey,
    pub subject_id: String,
    pub predicate_label: String,
    pub object_id: String,
    pub value: MonetaryValue,
    pub value_index: usize,
    pub date: NaiveDate,
    pub granularity: Granularity,
    /// index into the sentence's dates; absent for the publication date
    pub date_index: Option<usize>,
    pub date_is_publication: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date_span: Option<(usize, usize)>,
    pub sentence_id: String,
    pub annotation_id: String,
    pub doc_id: String,
    pub order_index: usize,
    pub published: NaiveDate,
    pub sentence_text: String,
    pub article_length: u64,
    pub sentence_length: u64,
    pub business: bool,
    pub is_noun_predicate: bool,
    pub tense: Tense,
    pub pred_frequency: f64,
    pub value_in_arg: bool,
    pub date_in_arg: bool,
    pub subject_links: KbLinks,
    pub object_links: KbLinks,
}

impl CandidateQuintuple {
    pub fn event_id(&self) -> String {
        self.event_key.id()
    }
}

/// Buckets sentences by event key. Groups come out in key order, their
/// sentences by (published, doc_id, order_index).
pub fn group_sentences(annotated: &[AnnotatedSentence], ontology: &Ontology) -> Result<Vec<EventGroup>, OntologyError> {
    let mut buckets: BTreeMap<EventKey, Vec<AnnotatedSentence>> = BTreeMap::new();
    for sentence in annotated {
        let key = EventKey {
            subject_id: sentence.subject.entity_id.clone(),
            predicate_class: ontology.second_level_ancestor(&sentence.predicate.label)?.to_string(),
            object_id: sentence.object.entity_id.clone(),
        };
        buckets.entry(key).or_default().push(sentence.clone());
    }
    Ok(buckets
        .into_iter()
        .map(|(key, mut sentences)| {
            sentences.sort_by(|a, b| {
                (a.published, &a.doc_id, a.order_index, &a.annotation_id).cmp(&(
                    b.published,
                    &b.doc_id,
                    b.order_index,
                    &b.annotation_id,
                ))
            });
            EventGroup { key, sentences }
        })
        .collect())
}

/// (date, granularity, index in the sentence, span, in a date argument)
type DateChoice = (NaiveDate, Granularity, Option<usize>, Option<(usize, usize)>, bool);

/// R_e: every value crossed with every explicit date, or with the
/// publication date when the sentence has none.
pub fn generate_candidates(group: &EventGroup) -> Vec<CandidateQuintuple> {
    let event_id = group.key.id();
    let mut out = Vec::new();
    for x in &group.sentences {
        let dates: Vec<DateChoice> = if x.dates.is_empty() {
            vec![(x.published, Granularity::Day, None, None, false)]
        } else {
            x.dates
                .iter()
                .enumerate()
                .map(|(j, d)| {
                    (
                        d.date,
                        d.granularity,
                        Some(j),
                        Some(d.char_span),
                        x.date_args.get(j).copied().unwrap_or(false),
                    )
                })
                .collect()
        };
        for (i, value) in x.values.iter().enumerate() {
            for &(date, granularity, date_index, date_span, date_in_arg) in &dates {
                out.push(CandidateQuintuple {
                    candidate_id: format!("{event_id}.{}", out.len()),
                    event_key: group.key.clone(),
                    subject_id: x.subject.entity_id.clone(),
                    predicate_label: x.predicate.label.clone(),
                    object_id: x.object.entity_id.clone(),
                    value: value.clone(),
                    value_index: i,
                    date,
                    granularity,
                    date_index,
                    date_is_publication: date_index.is_none(),
                    date_span,
                    sentence_id: x.sentence_id.clone(),
                    annotation_id: x.annotation_id.clone(),
                    doc_id: x.doc_id.clone(),
                    order_index: x.order_index,
                    published: x.published,
                    sentence_text: x.text.clone(),
                    article_length: x.article_length,
                    sentence_length: x.sentence_length,
                    business: x.business,
                    is_noun_predicate: x.predicate.is_noun,
                    tense: x.predicate.tense,
                    pred_frequency: x.pred_frequency,
                    value_in_arg: x.value_args.get(i).copied().unwrap_or(false),
                    date_in_arg,
                    subject_links: x.subject_links,
                    object_links: x.object_links,
                });
            }
        }
    }
    out
}

/// Candidates of one event, in generation order.
#[derive(Debug, Clone, PartialEq)]
pub struct EventCandidates {
    pub key: EventKey,
    pub candidates: Vec<CandidateQuintuple>,
}

/// Regroups a flat candidate list by event key, keeping per-event order.
pub fn regroup(candidates: Vec<CandidateQuintuple>) -> Vec<EventCandidates> {
    let mut buckets: BTreeMap<EventKey, Vec<CandidateQuintuple>> = BTreeMap::new();
    for c in candidates {
        buckets.entry(c.event_key.clone()).or_default().push(c);
    }
    buckets
        .into_iter()
        .map(|(key, candidates)| EventCandidates { key, candidates })
        .collect()
}
