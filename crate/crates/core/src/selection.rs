//! Picking one quintuple per event: three baselines and a learned ranker.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::annotate::dates::truncate;
use crate::annotate::predicates::Tense;
use crate::events::{CandidateQuintuple, EventKey};
use crate::learning::{ForestModel, LearningError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Earliest,
    Latest,
    Frequent,
    Supervised,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Earliest, Method::Latest, Method::Frequent, Method::Supervised];

    pub fn name(self) -> &'static str {
        match self {
            Method::Earliest => "earliest",
            Method::Latest => "latest",
            Method::Frequent => "frequent",
            Method::Supervised => "supervised",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "earliest" => Ok(Method::Earliest),
            "latest" => Ok(Method::Latest),
            "frequent" => Ok(Method::Frequent),
            "supervised" => Ok(Method::Supervised),
            other => Err(format!("unknown selection method {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub event_key: EventKey,
    pub chosen: Option<CandidateQuintuple>,
    pub confidence: f64,
    pub method: Method,
}

#[derive(Debug, thiserror::Error)]
pub enum SelectionError {
    #[error("event {0} has no candidates")]
    Empty(String),
    #[error(transparent)]
    Model(#[from] LearningError),
}

/// Position within the event: sentence, then value, then date.
fn position(c: &CandidateQuintuple) -> (&str, usize, &str, usize, Option<usize>) {
    (&c.doc_id, c.order_index, &c.annotation_id, c.value_index, c.date_index)
}

/// Total order behind the earliest baseline and every tie-break.
pub fn earliest_order(a: &CandidateQuintuple, b: &CandidateQuintuple) -> Ordering {
    a.published
        .cmp(&b.published)
        .then_with(|| position(a).cmp(&position(b)))
}

fn latest_order(a: &CandidateQuintuple, b: &CandidateQuintuple) -> Ordering {
    b.published
        .cmp(&a.published)
        .then_with(|| position(a).cmp(&position(b)))
}

pub fn select_earliest(candidates: &[CandidateQuintuple]) -> Option<&CandidateQuintuple> {
    candidates.iter().min_by(|a, b| earliest_order(a, b))
}

pub fn select_latest(candidates: &[CandidateQuintuple]) -> Option<&CandidateQuintuple> {
    candidates.iter().min_by(|a, b| latest_order(a, b))
}

pub type PairKey = (
    rust_decimal::Decimal,
    String,
    chrono::NaiveDate,
    crate::annotate::dates::Granularity,
);

pub fn pair_key(c: &CandidateQuintuple) -> PairKey {
    (
        c.value.amount.normalize(),
        c.value.currency.clone(),
        truncate(c.date, c.granularity),
        c.granularity,
    )
}

/// Most repeated (value, date) pair; ties go to the earliest reporting.
pub fn select_most_frequent(candidates: &[CandidateQuintuple]) -> Option<&CandidateQuintuple> {
    let mut counts: HashMap<PairKey, usize> = HashMap::new();
    for c in candidates {
        *counts.entry(pair_key(c)).or_insert(0) += 1;
    }
    let best = counts.values().copied().max()?;
    candidates
        .iter()
        .filter(|c| counts[&pair_key(c)] == best)
        .min_by(|a, b| earliest_order(a, b))
}

/// The baseline pick; `None` for the supervised method or an empty set.
pub fn select_baseline(method: Method, candidates: &[CandidateQuintuple]) -> Option<&CandidateQuintuple> {
    match method {
        Method::Earliest => select_earliest(candidates),
        Method::Latest => select_latest(candidates),
        Method::Frequent => select_most_frequent(candidates),
        Method::Supervised => None,
    }
}

/// Feature names of the encoded vector, in column order.
pub const FEATURE_SCHEMA: [&str; 21] = [
    "dates_count",
    "article_length",
    "sentence_length",
    "sentence_order",
    "values_ratio",
    "correct_fin_arg",
    "pred_frequency",
    "predicate_tense_past",
    "predicate_tense_present",
    "predicate_tense_future",
    "predicate_tense_unknown",
    "object_has_cb_uri",
    "object_has_dbp_uri",
    "object_has_fb_uri",
    "nytc_desc_bus",
    "has_event_date",
    "correct_temp_arg",
    "is_noun_predicate",
    "subject_has_dbp_uri",
    "subject_has_cb_uri",
    "subject_has_fb_uri",
];

/// Column groups of the 18 features; the tense feature spans four columns.
pub fn feature_groups() -> Vec<(&'static str, Vec<usize>)> {
    let mut out: Vec<(&'static str, Vec<usize>)> = Vec::new();
    for (i, name) in FEATURE_SCHEMA.iter().enumerate() {
        let group = if name.starts_with("predicate_tense") {
            "predicate_tense"
        } else {
            name
        };
        match out.last_mut() {
            Some((g, cols)) if *g == group => cols.push(i),
            _ => out.push((group, vec![i])),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub dates_count: u32,
    pub article_length: u64,
    pub sentence_length: u64,
    pub sentence_order: usize,
    pub values_ratio: f64,
    pub correct_fin_arg: bool,
    pub pred_frequency: f64,
    pub predicate_tense: Tense,
    pub object_has_cb_uri: bool,
    pub object_has_dbp_uri: bool,
    pub object_has_fb_uri: bool,
    pub nytc_desc_bus: bool,
    pub has_event_date: bool,
    pub correct_temp_arg: bool,
    pub is_noun_predicate: bool,
    pub subject_has_dbp_uri: bool,
    pub subject_has_cb_uri: bool,
    pub subject_has_fb_uri: bool,
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

impl FeatureVector {
    pub fn encode(&self) -> Vec<f64> {
        let tense = |t: Tense| flag(self.predicate_tense == t);
        vec![
            self.dates_count as f64,
            self.article_length as f64,
            self.sentence_length as f64,
            self.sentence_order as f64,
            self.values_ratio,
            flag(self.correct_fin_arg),
            self.pred_frequency,
            tense(Tense::Past),
            tense(Tense::Present),
            tense(Tense::Future),
            tense(Tense::Unknown),
            flag(self.object_has_cb_uri),
            flag(self.object_has_dbp_uri),
            flag(self.object_has_fb_uri),
            flag(self.nytc_desc_bus),
            flag(self.has_event_date),
            flag(self.correct_temp_arg),
            flag(self.is_noun_predicate),
            flag(self.subject_has_dbp_uri),
            flag(self.subject_has_cb_uri),
            flag(self.subject_has_fb_uri),
        ]
    }
}

/// Features of `r` within its event's candidate set.
pub fn extract_features(r: &CandidateQuintuple, event: &[CandidateQuintuple]) -> FeatureVector {
    let date = truncate(r.date, r.granularity);
    let dates_count = event.iter().filter(|c| truncate(c.date, r.granularity) == date).count() as u32;
    let same_value = event
        .iter()
        .filter(|c| c.value.amount == r.value.amount && c.value.currency == r.value.currency)
        .count();
    FeatureVector {
        dates_count,
        article_length: r.article_length,
        sentence_length: r.sentence_length,
        sentence_order: r.order_index,
        values_ratio: same_value as f64 / event.len().max(1) as f64,
        correct_fin_arg: r.value_in_arg,
        pred_frequency: r.pred_frequency,
        predicate_tense: r.tense,
        object_has_cb_uri: r.object_links.crunchbase,
        object_has_dbp_uri: r.object_links.dbpedia,
        object_has_fb_uri: r.object_links.freebase,
        nytc_desc_bus: r.business,
        has_event_date: !r.date_is_publication,
        correct_temp_arg: r.date_in_arg,
        is_noun_predicate: r.is_noun_predicate,
        subject_has_dbp_uri: r.subject_links.dbpedia,
        subject_has_cb_uri: r.subject_links.crunchbase,
        subject_has_fb_uri: r.subject_links.freebase,
    }
}

/// Model score of every candidate, in input order.
pub fn score_event(candidates: &[CandidateQuintuple], model: &ForestModel) -> Result<Vec<f64>, LearningError> {
    candidates
        .iter()
        .map(|c| model.predict(&extract_features(c, candidates).encode()))
        .collect()
}

/// Highest-scoring candidate, ties to the earliest; `None` when empty.
pub fn argmax<'a>(candidates: &'a [CandidateQuintuple], scores: &[f64]) -> Option<(&'a CandidateQuintuple, f64)> {
    candidates
        .iter()
        .zip(scores.iter().copied())
        .min_by(|(a, sa), (b, sb)| sb.total_cmp(sa).then_with(|| earliest_order(a, b)))
}

/// The argmax candidate when its score reaches `gamma`.
pub fn select_supervised<'a>(
    candidates: &'a [CandidateQuintuple],
    model: &ForestModel,
    gamma: f64,
) -> Result<Option<(&'a CandidateQuintuple, f64)>, LearningError> {
    let scores = score_event(candidates, model)?;
    Ok(argmax(candidates, &scores).filter(|&(_, score)| score >= gamma))
}

/// Runs `method` on one event.
pub fn select_event(
    key: &EventKey,
    candidates: &[CandidateQuintuple],
    method: Method,
    model: Option<&ForestModel>,
    gamma: f64,
) -> Result<SelectionResult, SelectionError> {
    if candidates.is_empty() {
        return Err(SelectionError::Empty(key.id()));
    }
    let (chosen, confidence) = match method {
        Method::Supervised => {
            let model = model.ok_or(LearningError::MissingModel)?;
            match select_supervised(candidates, model, gamma)? {
                Some((c, score)) => (Some(c.clone()), score),
                None => {
                    let scores = score_event(candidates, model)?;
                    (None, argmax(candidates, &scores).map_or(0.0, |(_, s)| s))
                }
            }
        }
        baseline => (select_baseline(baseline, candidates).cloned(), 1.0),
    };
    Ok(SelectionResult {
        event_key: key.clone(),
        chosen,
        confidence,
        method,
    })
}
