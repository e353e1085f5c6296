//! Sentence-level annotation: values, dates, predicates, entities, roles.

pub mod dates;
pub mod mentions;
pub mod money;
pub mod predicates;
pub mod roles;
pub mod tokens;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{segment_sentences, Document, PredicateStats, Sentence};
use crate::entities::{EntityRepository, KbLinks};
use crate::ontology::Ontology;
use dates::{extract_dates, DateMention, NumericDateOrder};
use mentions::{recognize_entities, EntityMention};
use money::{recognize_monetary_values, MonetaryValue};
use predicates::{predicates_in, PredicateMention};
use roles::assign_roles;

/// One successful role assignment: a sentence with a single predicate, its
/// subject and object, and every value and date of the sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedSentence {
    pub annotation_id: String,
    pub sentence_id: String,
    pub doc_id: String,
    pub order_index: usize,
    pub text: String,
    pub char_span: (usize, usize),
    pub published: NaiveDate,
    pub article_length: u64,
    pub sentence_length: u64,
    pub business: bool,
    pub values: Vec<MonetaryValue>,
    pub dates: Vec<DateMention>,
    pub predicate: PredicateMention,
    pub subject: EntityMention,
    pub object: EntityMention,
    pub value_in_correct_arg: bool,
    pub date_in_correct_arg: bool,
    pub value_args: Vec<bool>,
    pub date_args: Vec<bool>,
    pub pred_frequency: f64,
    pub subject_links: KbLinks,
    pub object_links: KbLinks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AnnotatorConfig {
    pub noun_predicates: bool,
    pub enforce_roles: bool,
    pub require_description: bool,
    pub date_order: NumericDateOrder,
}

pub struct Annotator<'a> {
    pub ontology: &'a Ontology,
    pub repository: &'a EntityRepository,
    pub stats: &'a PredicateStats,
    pub config: AnnotatorConfig,
}

#[derive(Debug, Default)]
pub struct AnnotationOutput {
    pub sentences: Vec<AnnotatedSentence>,
    pub diagnostics: Vec<String>,
}

impl Annotator<'_> {
    pub fn annotate_sentence(&self, doc: &Document, sentence: &Sentence) -> AnnotationOutput {
        let mut out = AnnotationOutput::default();
        let text = sentence.text.as_str();
        let tokens = tokens::tokenize(text);
        let values = recognize_monetary_values(text, &tokens);
        if values.is_empty() {
            return out;
        }
        let predicates = predicates_in(&tokens, self.ontology, self.config.noun_predicates);
        if predicates.is_empty() {
            return out;
        }
        let mentions = recognize_entities(text, &tokens, self.repository, self.config.require_description);
        let scan = extract_dates(&tokens, doc.publication_date, self.config.date_order);
        out.diagnostics.extend(
            scan.diagnostics
                .into_iter()
                .map(|d| format!("{}: {d}", sentence.sentence_id)),
        );
        let links = |id: &str| self.repository.get(id).map(|r| r.kb_links()).unwrap_or_default();

        for predicate in predicates {
            let Some(roles) = assign_roles(
                &tokens,
                &mentions,
                &predicate,
                &values,
                &scan.mentions,
                self.config.enforce_roles,
            ) else {
                continue;
            };
            let k = out.sentences.len();
            out.sentences.push(AnnotatedSentence {
                annotation_id: format!("{}/{k}", sentence.sentence_id),
                sentence_id: sentence.sentence_id.clone(),
                doc_id: doc.doc_id.clone(),
                order_index: sentence.order_index,
                text: sentence.text.clone(),
                char_span: sentence.char_span,
                published: doc.publication_date,
                article_length: doc.word_count,
                sentence_length: text.split_whitespace().count() as u64,
                business: doc.is_business(),
                values: values.clone(),
                dates: scan.mentions.clone(),
                pred_frequency: self.stats.relative_frequency(&predicate.label),
                subject_links: links(&roles.subject.entity_id),
                object_links: links(&roles.object.entity_id),
                value_in_correct_arg: roles.value_in_correct_arg(),
                date_in_correct_arg: roles.date_in_correct_arg(),
                predicate,
                subject: roles.subject,
                object: roles.object,
                value_args: roles.value_args,
                date_args: roles.date_args,
            });
        }
        out
    }

    pub fn annotate_document(&self, doc: &Document) -> AnnotationOutput {
        let mut out = AnnotationOutput::default();
        for sentence in segment_sentences(doc) {
            let one = self.annotate_sentence(doc, &sentence);
            out.sentences.extend(one.sentences);
            out.diagnostics.extend(one.diagnostics);
        }
        out
    }

    /// Annotates documents in parallel; output keeps corpus order.
    pub fn annotate_corpus(&self, docs: &[Document]) -> AnnotationOutput {
        let parts: Vec<AnnotationOutput> = docs.par_iter().map(|d| self.annotate_document(d)).collect();
        let mut out = AnnotationOutput::default();
        for part in parts {
            out.sentences.extend(part.sentences);
            out.diagnostics.extend(part.diagnostics);
        }
        out
    }
}
