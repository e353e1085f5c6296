//! Positional role assignment around one predicate mention.
//!
//! Searches never leave the predicate's clause, delimited by `,` `;` `:`
//! outside value and date spans.

use super::dates::DateMention;
use super::mentions::EntityMention;
use super::money::MonetaryValue;
use super::predicates::PredicateMention;
use super::tokens::{token_at, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleAssignment {
    pub subject: EntityMention,
    pub object: EntityMention,
    /// per value of the sentence: lies in the predicate's financial argument
    pub value_args: Vec<bool>,
    /// per date of the sentence: lies in a temporal adjunct of the predicate
    pub date_args: Vec<bool>,
}

impl RoleAssignment {
    pub fn value_in_correct_arg(&self) -> bool {
        self.value_args.iter().any(|&b| b)
    }

    pub fn date_in_correct_arg(&self) -> bool {
        self.date_args.iter().any(|&b| b)
    }
}

const VALUE_MARKERS: &[&str] = &["for", "at", "worth", "of", "totaling", "totalling", "valued"];

const VALUE_MODIFIERS: &[&str] = &[
    "about",
    "around",
    "approximately",
    "roughly",
    "nearly",
    "almost",
    "some",
    "an",
    "a",
    "estimated",
    "reported",
    "more",
    "less",
    "than",
    "over",
    "under",
    "up",
    "to",
    "just",
    "total",
    "additional",
    "further",
    "another",
    "least",
    "most",
];

const TEMPORAL_PREPOSITIONS: &[&str] = &[
    "in", "on", "during", "since", "by", "until", "last", "this", "next", "early", "late", "as", "of",
];

struct Clause {
    start: usize,
    end: usize,
}

fn inside(pos: usize, spans: &[(usize, usize)]) -> bool {
    spans.iter().any(|&(a, b)| a <= pos && pos < b)
}

/// Token range of the clause around token `i`.
fn clause_of(tokens: &[Token], i: usize, protected: &[(usize, usize)]) -> Clause {
    let boundary = |t: &Token| matches!(t.text.as_str(), "," | ";" | ":") && !inside(t.start, protected);
    let start = (0..i).rev().find(|&k| boundary(&tokens[k])).map_or(0, |k| k + 1);
    let end = (i + 1..tokens.len())
        .find(|&k| boundary(&tokens[k]))
        .unwrap_or(tokens.len());
    Clause { start, end }
}

fn token_range(tokens: &[Token], span: (usize, usize)) -> (usize, usize) {
    let a = token_at(tokens, span.0);
    let b = token_at(tokens, span.1.saturating_sub(1)) + 1;
    (a, b)
}

pub fn assign_roles(
    tokens: &[Token],
    mentions: &[EntityMention],
    predicate: &PredicateMention,
    values: &[MonetaryValue],
    dates: &[DateMention],
    enforce: bool,
) -> Option<RoleAssignment> {
    if values.is_empty() {
        return None;
    }
    let mut distinct: Vec<&str> = mentions.iter().map(|m| m.entity_id.as_str()).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return None;
    }

    let protected: Vec<(usize, usize)> = values
        .iter()
        .map(|v| v.char_span)
        .chain(dates.iter().map(|d| d.char_span))
        .collect();
    let (p_first, p_end) = token_range(tokens, predicate.char_span);
    let clause = clause_of(tokens, p_first, &protected);
    let in_clause = |m: &EntityMention| {
        let (a, b) = token_range(tokens, m.char_span);
        a >= clause.start && b <= clause.end
    };
    let left: Vec<&EntityMention> = mentions
        .iter()
        .filter(|m| m.char_span.1 <= predicate.char_span.0 && in_clause(m))
        .collect();
    let right: Vec<&EntityMention> = mentions
        .iter()
        .filter(|m| m.char_span.0 >= predicate.char_span.1 && in_clause(m))
        .collect();

    // "by" directly before a right-hand mention, optionally with an article
    let agent = right.iter().copied().find(|m| {
        let a = token_at(tokens, m.char_span.0);
        let mut k = a;
        if k > 0 && tokens[k - 1].is("the") {
            k -= 1;
        }
        k > 0 && tokens[k - 1].is("by")
    });

    let (subject, object) = if predicate.is_noun {
        let object = right.iter().copied().find(|m| Some(*m) != agent);
        let subject = agent.or_else(|| left.last().copied());
        (subject, object)
    } else if predicate.passive {
        let object = left.last().copied();
        (agent, object)
    } else {
        let subject = left.last().copied();
        let object = subject.and_then(|s| right.iter().copied().find(|m| m.entity_id != s.entity_id));
        (subject, object)
    };
    let (subject, object) = (subject?, object?);
    if subject.entity_id == object.entity_id {
        return None;
    }

    let object_end = token_range(tokens, object.char_span).1;
    let value_args: Vec<bool> = values
        .iter()
        .map(|v| {
            let (a, b) = token_range(tokens, v.char_span);
            if a >= p_end && b <= clause.end {
                let mut k = a;
                while k > p_end && VALUE_MODIFIERS.contains(&tokens[k - 1].lower.as_str()) {
                    k -= 1;
                }
                let marker = k > p_end && VALUE_MARKERS.contains(&tokens[k - 1].lower.as_str());
                let adjacent = k == p_end || k == object_end;
                if marker || adjacent {
                    return true;
                }
            }
            // premodifier: "its $10.3 billion acquisition"
            predicate.is_noun && b == p_first
        })
        .collect();

    let date_args: Vec<bool> = dates
        .iter()
        .map(|d| {
            let (a, b) = token_range(tokens, d.char_span);
            if a >= clause.start && b <= clause.end {
                return true;
            }
            // fronted adjunct: "In 2004, Oracle bought ..."
            b <= clause.start
                && tokens[..a]
                    .iter()
                    .all(|t| TEMPORAL_PREPOSITIONS.contains(&t.lower.as_str()))
                && tokens[b..clause.start].iter().all(|t| t.kind == TokenKind::Symbol)
        })
        .collect();

    if enforce && !value_args.iter().any(|&x| x) {
        return None;
    }
    Some(RoleAssignment {
        subject: EntityMention {
            role: Some(super::mentions::Role::Subject),
            ..subject.clone()
        },
        object: EntityMention {
            role: Some(super::mentions::Role::Object),
            ..object.clone()
        },
        value_args,
        date_args,
    })
}
