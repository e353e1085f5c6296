//! Stage glue: candidate extraction, selection over all events and
//! leave-one-company-out cross-validation.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annotate::AnnotatedSentence;
use crate::evaluation::{company_tag, evaluate, EvalReport, GroundTruthEvent, MatchMode};
use crate::events::{generate_candidates, group_sentences, CandidateQuintuple, EventCandidates, EventKey};
use crate::learning::{label_instances, train_on_instances, ForestModel, Hyperparams, LearningError};
use crate::ontology::{Ontology, OntologyError};
use crate::selection::{argmax, score_event, select_event, Method, SelectionError, SelectionResult};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error(transparent)]
    Learning(#[from] LearningError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error("cross-validation needs at least two companies, found {0}")]
    TooFewCompanies(usize),
    #[error("fold {company}: no training instances")]
    EmptyFold { company: String },
}

/// Groups annotated sentences into events and enumerates each R_e.
pub fn extract_events(
    annotated: &[AnnotatedSentence],
    ontology: &Ontology,
) -> Result<Vec<EventCandidates>, OntologyError> {
    Ok(group_sentences(annotated, ontology)?
        .iter()
        .map(|g| EventCandidates {
            key: g.key.clone(),
            candidates: generate_candidates(g),
        })
        .collect())
}

pub fn select_all(
    events: &[EventCandidates],
    method: Method,
    model: Option<&ForestModel>,
    gamma: f64,
) -> Result<Vec<SelectionResult>, SelectionError> {
    if method == Method::Supervised {
        let model = model.ok_or(LearningError::MissingModel)?;
        model.check_candidate_schema()?;
    }
    events
        .par_iter()
        .map(|e| select_event(&e.key, &e.candidates, method, model, gamma))
        .collect()
}

/// Highest-scoring candidate of one held-out event, before thresholding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPick {
    pub event_key: EventKey,
    pub candidate: CandidateQuintuple,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub company: String,
    pub train_instances: usize,
    pub train_positives: usize,
    pub test_events: usize,
    pub test_truths: usize,
    pub reports: BTreeMap<Method, EvalReport>,
    pub picks: Vec<ScoredPick>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooReport {
    pub mode: MatchMode,
    pub gamma: f64,
    pub folds: Vec<FoldReport>,
    pub aggregate: BTreeMap<Method, EvalReport>,
    /// events without a company, excluded from every fold
    pub untagged_events: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct LooSettings {
    pub mode: MatchMode,
    pub gamma: f64,
    pub seed: u64,
    pub forest: Hyperparams,
}

/// Trains on all companies but one and evaluates on the held-out one, for
/// every company in the truth file. Counts are summed across folds.
pub fn loo_cv(
    events: &[EventCandidates],
    truths: &[GroundTruthEvent],
    ontology: &Ontology,
    settings: LooSettings,
) -> Result<LooReport, PipelineError> {
    let companies: BTreeSet<&str> = truths.iter().map(|t| t.company_tag.as_str()).collect();
    if companies.len() < 2 {
        return Err(PipelineError::TooFewCompanies(companies.len()));
    }
    let mut tagged: Vec<(&EventCandidates, String)> = Vec::new();
    let mut untagged_events = 0;
    for e in events {
        match company_tag(&e.key, truths, ontology)? {
            Some(tag) => tagged.push((e, tag)),
            None => untagged_events += 1,
        }
    }

    let mut folds = Vec::new();
    for company in companies {
        let train_events: Vec<EventCandidates> = tagged
            .iter()
            .filter(|(_, t)| t != company)
            .map(|(e, _)| (*e).clone())
            .collect();
        let train_truths: Vec<GroundTruthEvent> = truths.iter().filter(|t| t.company_tag != company).cloned().collect();
        let test_events: Vec<EventCandidates> = tagged
            .iter()
            .filter(|(_, t)| t == company)
            .map(|(e, _)| (*e).clone())
            .collect();
        let test_truths: Vec<GroundTruthEvent> = truths.iter().filter(|t| t.company_tag == company).cloned().collect();

        let instances = label_instances(&train_events, &train_truths, ontology)?;
        if instances.is_empty() {
            return Err(PipelineError::EmptyFold {
                company: company.to_string(),
            });
        }
        let model = train_on_instances(&instances, settings.forest, settings.seed)?;

        let mut reports = BTreeMap::new();
        for method in Method::ALL {
            let selections = select_all(&test_events, method, Some(&model), settings.gamma)?;
            reports.insert(method, evaluate(&selections, &test_truths, settings.mode, ontology)?);
        }
        let mut picks = Vec::new();
        for e in &test_events {
            let scores = score_event(&e.candidates, &model)?;
            if let Some((c, score)) = argmax(&e.candidates, &scores) {
                picks.push(ScoredPick {
                    event_key: e.key.clone(),
                    candidate: c.clone(),
                    score,
                });
            }
        }
        folds.push(FoldReport {
            company: company.to_string(),
            train_instances: instances.len(),
            train_positives: instances.iter().filter(|i| i.label >= 0.5).count(),
            test_events: test_events.len(),
            test_truths: test_truths.len(),
            reports,
            picks,
        });
    }

    let aggregate = Method::ALL
        .iter()
        .map(|&m| {
            let per_fold: Vec<EvalReport> = folds.iter().map(|f| f.reports[&m]).collect();
            (m, EvalReport::combine(&per_fold, settings.mode))
        })
        .collect();
    Ok(LooReport {
        mode: settings.mode,
        gamma: settings.gamma,
        folds,
        aggregate,
        untagged_events,
    })
}

/// Supervised scores of a finished cross-validation re-thresholded at
/// `gamma`. Models do not depend on the threshold, so no retraining is needed.
pub fn rethreshold(
    report: &LooReport,
    truths: &[GroundTruthEvent],
    ontology: &Ontology,
    gamma: f64,
) -> Result<(EvalReport, usize), OntologyError> {
    let mut per_fold = Vec::new();
    let mut returned = 0;
    for fold in &report.folds {
        let selections: Vec<SelectionResult> = fold
            .picks
            .iter()
            .map(|p| SelectionResult {
                event_key: p.event_key.clone(),
                chosen: (p.score >= gamma).then(|| p.candidate.clone()),
                confidence: p.score,
                method: Method::Supervised,
            })
            .collect();
        returned += selections.iter().filter(|s| s.chosen.is_some()).count();
        let fold_truths: Vec<GroundTruthEvent> = truths
            .iter()
            .filter(|t| t.company_tag == fold.company)
            .cloned()
            .collect();
        per_fold.push(evaluate(&selections, &fold_truths, report.mode, ontology)?);
    }
    Ok((EvalReport::combine(&per_fold, report.mode), returned))
}

/// Number of events and quintuples, as reported per run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionCounts {
    pub events: usize,
    pub quintuples: usize,
}

pub fn counts(events: &[EventCandidates]) -> ExtractionCounts {
    ExtractionCounts {
        events: events.len(),
        quintuples: events.iter().map(|e| e.candidates.len()).sum(),
    }
}
