//! Organization mentions by longest match against the entity repository.

use serde::{Deserialize, Serialize};

use super::tokens::{Token, TokenKind};
use crate::entities::EntityRepository;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Subject,
    Object,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMention {
    pub entity_id: String,
    pub char_span: (usize, usize),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<Role>,
}

const BARRIERS: &[&str] = &[",", ";", ":", "(", ")", "\"", "\u{201c}", "\u{201d}", "'s", "\u{2019}s"];

/// Span candidates start at a token carrying an uppercase letter.
fn can_start(t: &Token) -> bool {
    t.kind != TokenKind::Symbol && t.text.chars().any(char::is_uppercase)
}

pub fn recognize_entities(
    text: &str,
    tokens: &[Token],
    repository: &EntityRepository,
    require_description: bool,
) -> Vec<EntityMention> {
    // a period after "Inc" and similar adds one token per form word
    let limit = repository.max_form_tokens() * 2;
    let mut hits: Vec<(usize, usize, String)> = Vec::new();
    for i in 0..tokens.len() {
        if !can_start(&tokens[i]) {
            continue;
        }
        for j in i..tokens.len().min(i + limit.max(1)) {
            let last = &tokens[j];
            if BARRIERS.contains(&last.lower.as_str()) {
                break;
            }
            if last.kind == TokenKind::Symbol {
                continue;
            }
            let (start, end) = (tokens[i].start, last.end);
            if let Some(record) = repository.resolve_mention(&text[start..end], require_description) {
                hits.push((start, end, record.entity_id.clone()));
            }
        }
    }
    // longest first, then leftmost
    hits.sort_by(|a, b| (b.1 - b.0).cmp(&(a.1 - a.0)).then(a.0.cmp(&b.0)));
    let mut chosen: Vec<(usize, usize, String)> = Vec::new();
    for hit in hits {
        if chosen.iter().all(|c| hit.1 <= c.0 || hit.0 >= c.1) {
            chosen.push(hit);
        }
    }
    chosen.sort_by_key(|c| c.0);
    chosen
        .into_iter()
        .map(|(start, end, entity_id)| EntityMention {
            entity_id,
            char_span: (start, end),
            role: None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::tokens::tokenize;
    use super::*;
    use crate::entities::{merge_records, RawEntry};

    fn entry(name: &str, uri: &str, desc: bool) -> RawEntry {
        RawEntry {
            name: name.into(),
            uris: vec![uri.into()],
            has_description: desc,
            prominence: 1.0,
        }
    }

    fn repo() -> EntityRepository {
        merge_records(&[
            entry("Google", "dbpedia:Google", true),
            entry("YouTube", "dbpedia:YouTube", true),
            entry("AOL", "dbpedia:AOL", false),
            entry("Skype", "crunchbase:organization/skype", true),
            entry("Skype Technologies", "dbpedia:Skype_Technologies", true),
            entry("Skype Europe Holdings", "freebase:m.skype_eu", true),
        ])
    }

    fn found(text: &str, require_description: bool) -> Vec<(String, &str)> {
        recognize_entities(text, &tokenize(text), &repo(), require_description)
            .into_iter()
            .map(|m| (m.entity_id, &text[m.char_span.0..m.char_span.1]))
            .collect()
    }

    #[test]
    fn table_one_mentions() {
        let s = "Before Google agreed to buy YouTube for $1.65 billion in stock, it paid $1 billion for 5% of AOL.";
        let ids: Vec<String> = found(s, false).into_iter().map(|(id, _)| id).collect();
        assert_eq!(ids, vec!["google", "youtube", "aol"]);
        assert_eq!(found(s, true).len(), 2);
    }

    #[test]
    fn longest_match_wins() {
        let s = "Skype Europe Holdings and Skype Technologies, not Skype's rivals.";
        let got = found(s, false);
        assert_eq!(
            got.iter().map(|(_, t)| *t).collect::<Vec<_>>(),
            vec!["Skype Europe Holdings", "Skype Technologies", "Skype"]
        );
    }

    #[test]
    fn longest_match_agrees_with_brute_force() {
        // no resolvable sub-span may strictly contain a chosen mention
        let s = "Analysts said Skype Technologies and Google Skype were quiet.";
        let tokens = tokenize(s);
        let chosen = recognize_entities(s, &tokens, &repo(), false);
        let mut resolvable = Vec::new();
        for i in 0..tokens.len() {
            for j in i..tokens.len() {
                let (a, b) = (tokens[i].start, tokens[j].end);
                if repo().resolve_mention(&s[a..b], false).is_some() {
                    resolvable.push((a, b));
                }
            }
        }
        for m in &chosen {
            let (a, b) = m.char_span;
            assert!(resolvable.contains(&(a, b)));
            assert!(!resolvable.iter().any(|&(x, y)| x <= a && b <= y && (x, y) != (a, b)));
        }
        let spans: Vec<&str> = chosen.iter().map(|m| &s[m.char_span.0..m.char_span.1]).collect();
        assert_eq!(spans, vec!["Skype Technologies", "Google", "Skype"]);
    }

    #[test]
    fn lowercase_sentence_has_none() {
        assert!(found("the company paid a lot of money for it.", false).is_empty());
    }
}
