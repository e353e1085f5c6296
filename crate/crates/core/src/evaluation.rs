//! Scoring selections against ground truth.
//!
//! Relaxed matching compares years only and allows a deviation of at most
//! 10% of the true amount; strict matching wants the exact amount and the
//! date at the truth's granularity.

use std::path::Path;

use chrono::{Datelike, NaiveDate};
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::annotate::dates::{truncate, Granularity};
use crate::events::{CandidateQuintuple, EventKey};
use crate::jsonl::{self, JsonlError};
use crate::ontology::{Ontology, OntologyError};
use crate::selection::SelectionResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    Events,
    Strict,
    Relaxed,
}

impl std::str::FromStr for MatchMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "events" | "events_only" => Ok(MatchMode::Events),
            "strict" => Ok(MatchMode::Strict),
            "relaxed" => Ok(MatchMode::Relaxed),
            other => Err(format!("unknown match mode {other:?}")),
        }
    }
}

/// A truth date with its precision: "2004", "2004-10" or "2004-10-26".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TruthDate {
    pub date: NaiveDate,
    pub granularity: Granularity,
}

impl std::str::FromStr for TruthDate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("bad date {s:?}, expected YYYY, YYYY-MM or YYYY-MM-DD");
        let parts: Vec<&str> = s.trim().split('-').collect();
        let num = |p: &str| p.parse::<u32>().map_err(|_| bad());
        let (y, m, d, granularity) = match parts.as_slice() {
            [y] => (num(y)?, 1, 1, Granularity::Year),
            [y, m] => (num(y)?, num(m)?, 1, Granularity::Month),
            [y, m, d] => (num(y)?, num(m)?, num(d)?, Granularity::Day),
            _ => return Err(bad()),
        };
        let date = NaiveDate::from_ymd_opt(y as i32, m, d).ok_or_else(bad)?;
        Ok(TruthDate { date, granularity })
    }
}

impl std::fmt::Display for TruthDate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.granularity {
            Granularity::Year => write!(f, "{}", self.date.format("%Y")),
            Granularity::Month => write!(f, "{}", self.date.format("%Y-%m")),
            Granularity::Day => write!(f, "{}", self.date.format("%Y-%m-%d")),
        }
    }
}

impl Serialize for TruthDate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TruthDate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One line of the ground-truth file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthEvent {
    #[serde(rename = "company")]
    pub company_tag: String,
    #[serde(rename = "subject")]
    pub subject_id: String,
    pub predicate: String,
    #[serde(rename = "object")]
    pub object_id: String,
    #[serde(with = "rust_decimal::serde::str")]
    pub amount: Decimal,
    pub currency: String,
    pub date: TruthDate,
}

pub fn load_truth(path: impl AsRef<Path>) -> Result<Vec<GroundTruthEvent>, JsonlError> {
    jsonl::read_all(path)
}

/// Same participants and an equivalent predicate.
pub fn match_event(key: &EventKey, truth: &GroundTruthEvent, ontology: &Ontology) -> Result<bool, OntologyError> {
    if key.subject_id != truth.subject_id || key.object_id != truth.object_id {
        return Ok(false);
    }
    Ok(predicate_class(ontology, &key.predicate_class)? == predicate_class(ontology, &truth.predicate)?)
}

/// Second-level class of a label, mapping noun forms to their verb first.
fn predicate_class<'a>(ontology: &'a Ontology, label: &'a str) -> Result<&'a str, OntologyError> {
    let verb = if ontology.contains(label) {
        label
    } else {
        ontology.noun_to_verb(label).unwrap_or(label)
    };
    ontology.second_level_ancestor(verb)
}

/// Attribute agreement of an extracted (amount, currency, date) with truth.
pub fn match_attributes(
    amount: Decimal,
    currency: &str,
    date: NaiveDate,
    truth: &GroundTruthEvent,
    mode: MatchMode,
) -> bool {
    if mode == MatchMode::Events {
        return true;
    }
    if currency != truth.currency {
        return false;
    }
    match mode {
        MatchMode::Events => true,
        MatchMode::Strict => amount == truth.amount && truncate(date, truth.date.granularity) == truth.date.date,
        MatchMode::Relaxed => {
            // |v - t| / t <= 0.1 without division
            let deviation = (amount - truth.amount).abs() * Decimal::TEN;
            truth.amount > Decimal::ZERO && deviation <= truth.amount && date.year() == truth.date.date.year()
        }
    }
}

pub fn candidate_matches(
    c: &CandidateQuintuple,
    truth: &GroundTruthEvent,
    mode: MatchMode,
    ontology: &Ontology,
) -> Result<bool, OntologyError> {
    Ok(match_event(&c.event_key, truth, ontology)?
        && match_attributes(c.value.amount, &c.value.currency, c.date, truth, mode))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: MatchMode,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl EvalReport {
    pub fn from_counts(mode: MatchMode, tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        EvalReport {
            mode,
            tp,
            fp,
            fn_,
            precision,
            recall,
            f1,
        }
    }

    /// Sum of counts, with measures recomputed.
    pub fn combine(reports: &[EvalReport], mode: MatchMode) -> Self {
        let (tp, fp, fn_) = reports
            .iter()
            .fold((0, 0, 0), |(a, b, c), r| (a + r.tp, b + r.fp, c + r.fn_));
        EvalReport::from_counts(mode, tp, fp, fn_)
    }
}

/// Greedy one-to-one matching of returned selections to truth records, in
/// (event key, published) order. Selections that returned nothing are not
/// extractions.
pub fn evaluate(
    selections: &[SelectionResult],
    truths: &[GroundTruthEvent],
    mode: MatchMode,
    ontology: &Ontology,
) -> Result<EvalReport, OntologyError> {
    let mut chosen: Vec<(&EventKey, &CandidateQuintuple)> = selections
        .iter()
        .filter_map(|s| s.chosen.as_ref().map(|c| (&s.event_key, c)))
        .collect();
    chosen.sort_by(|a, b| (a.0, a.1.published).cmp(&(b.0, b.1.published)));
    let mut used = vec![false; truths.len()];
    let (mut tp, mut fp) = (0, 0);
    for (key, c) in chosen {
        let mut hit = None;
        for (i, t) in truths.iter().enumerate() {
            if used[i] || !match_event(key, t, ontology)? {
                continue;
            }
            if match_attributes(c.value.amount, &c.value.currency, c.date, t, mode) {
                hit = Some(i);
                break;
            }
        }
        match hit {
            Some(i) => {
                used[i] = true;
                tp += 1;
            }
            None => fp += 1,
        }
    }
    let fn_ = used.iter().filter(|u| !**u).count();
    Ok(EvalReport::from_counts(mode, tp, fp, fn_))
}

/// Company an event is evaluated under: its matching truth's company, else
/// whichever participant is a company of interest, subject first.
pub fn company_tag(
    key: &EventKey,
    truths: &[GroundTruthEvent],
    ontology: &Ontology,
) -> Result<Option<String>, OntologyError> {
    for t in truths {
        if match_event(key, t, ontology)? {
            return Ok(Some(t.company_tag.clone()));
        }
    }
    let companies = |id: &str| truths.iter().any(|t| t.company_tag == id);
    Ok(if companies(&key.subject_id) {
        Some(key.subject_id.clone())
    } else if companies(&key.object_id) {
        Some(key.object_id.clone())
    } else {
        None
    })
}
