//! Gazetteer tagger for ontology predicates, verbal and nominal.

use serde::{Deserialize, Serialize};

use super::tokens::{Token, TokenKind};
use crate::ontology::Ontology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tense {
    Past,
    Present,
    Future,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateMention {
    pub label: String,
    pub is_noun: bool,
    pub tense: Tense,
    pub char_span: (usize, usize),
    /// be-auxiliary followed by a participle
    #[serde(default)]
    pub passive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Form {
    Base,
    Third,
    Past,
    Participle,
    PastOrParticiple,
    Gerund,
}

impl Form {
    fn participle(self) -> bool {
        matches!(self, Form::Participle | Form::PastOrParticiple)
    }
}

const IRREGULAR: &[(&str, &str, Form)] = &[
    ("bought", "buy", Form::PastOrParticiple),
    ("sold", "sell", Form::PastOrParticiple),
    ("resold", "resell", Form::PastOrParticiple),
    ("paid", "pay", Form::PastOrParticiple),
    ("repaid", "repay", Form::PastOrParticiple),
    ("prepaid", "prepay", Form::PastOrParticiple),
    ("spent", "spend", Form::PastOrParticiple),
    ("overspent", "overspend", Form::PastOrParticiple),
    ("lent", "lend", Form::PastOrParticiple),
    ("won", "win", Form::PastOrParticiple),
    ("got", "get", Form::PastOrParticiple),
    ("gotten", "get", Form::Participle),
    ("gave", "give", Form::Past),
    ("given", "give", Form::Participle),
    ("lost", "lose", Form::PastOrParticiple),
    ("bid", "bid", Form::Base),
    ("bidding", "bid", Form::Gerund),
    ("underwrote", "underwrite", Form::Past),
    ("underwritten", "underwrite", Form::Participle),
    ("dealt", "deal", Form::PastOrParticiple),
    ("took", "take", Form::Past),
    ("taken", "take", Form::Participle),
];

const DETERMINERS: &[&str] = &[
    "a", "an", "the", "its", "their", "his", "her", "our", "this", "that", "these", "those", "'s", "any", "each",
    "every", "no",
];

const NOUN_PREMODIFIERS: &[&str] = &[
    "thousand", "million", "billion", "trillion", "bn", "mln", "m", "proposed", "planned", "pending", "hostile",
    "failed", "recent", "biggest", "largest", "first", "new",
];

const SKIPPABLE: &[&str] = &[
    "not",
    "n't",
    "also",
    "still",
    "already",
    "recently",
    "reportedly",
    "later",
    "then",
    "just",
    "finally",
    "eventually",
    "quietly",
    "officially",
    "formally",
    "previously",
    "once",
    "never",
];

const MODALS: &[&str] = &["would", "could", "might", "may", "should", "can", "must"];

/// (lemma, form) readings of a lowercase word, most specific first.
fn verb_readings(word: &str) -> Vec<(String, Form)> {
    if let Some(&(_, lemma, form)) = IRREGULAR.iter().find(|(w, _, _)| *w == word) {
        return vec![(lemma.to_string(), form)];
    }
    let mut out = Vec::new();
    let undouble = |stem: &str| -> Option<String> {
        let b = stem.as_bytes();
        (b.len() >= 3 && b[b.len() - 1] == b[b.len() - 2] && !b"aeiou".contains(&b[b.len() - 1]))
            .then(|| stem[..stem.len() - 1].to_string())
    };
    if let Some(stem) = word.strip_suffix("ing").filter(|s| s.len() >= 2) {
        out.push((stem.to_string(), Form::Gerund));
        out.push((format!("{stem}e"), Form::Gerund));
        if let Some(u) = undouble(stem) {
            out.push((u, Form::Gerund));
        }
    }
    if let Some(stem) = word.strip_suffix("ied") {
        out.push((format!("{stem}y"), Form::PastOrParticiple));
    }
    if let Some(stem) = word.strip_suffix("ed").filter(|s| s.len() >= 2) {
        out.push((stem.to_string(), Form::PastOrParticiple));
        out.push((format!("{stem}e"), Form::PastOrParticiple));
        if let Some(u) = undouble(stem) {
            out.push((u, Form::PastOrParticiple));
        }
    }
    if let Some(stem) = word.strip_suffix("ies") {
        out.push((format!("{stem}y"), Form::Third));
    }
    if let Some(stem) = word.strip_suffix("es") {
        out.push((stem.to_string(), Form::Third));
    }
    if let Some(stem) = word.strip_suffix('s').filter(|s| !s.ends_with('s')) {
        out.push((stem.to_string(), Form::Third));
    }
    out.push((word.to_string(), Form::Base));
    out
}

fn singulars(word: &str) -> Vec<String> {
    let mut out = vec![word.to_string()];
    if let Some(stem) = word.strip_suffix("ies") {
        out.push(format!("{stem}y"));
    }
    if let Some(stem) = word.strip_suffix("es") {
        out.push(stem.to_string());
    }
    if let Some(stem) = word.strip_suffix('s') {
        out.push(stem.to_string());
    }
    out
}

fn is_word(t: Option<&Token>, words: &[&str]) -> bool {
    t.is_some_and(|t| words.contains(&t.lower.as_str()))
}

/// Index of the nearest token before `i` that is not a skippable adverb.
fn prev_content(tokens: &[Token], i: usize) -> Option<usize> {
    (0..i).rev().find(|&k| !SKIPPABLE.contains(&tokens[k].lower.as_str()))
}

fn looks_past(word: &str) -> bool {
    word.ends_with("ed")
        || IRREGULAR
            .iter()
            .any(|(w, _, f)| *w == word && matches!(f, Form::Past | Form::PastOrParticiple))
}

fn looks_present(word: &str) -> bool {
    matches!(word, "is" | "are" | "am" | "has" | "have" | "does" | "do")
        || (word.ends_with('s') && !word.ends_with("ss") && word.len() > 2)
}

/// Tense of the verb at `i` from its auxiliary chain, then its own morphology.
fn verb_tense(tokens: &[Token], i: usize, form: Form) -> (Tense, bool) {
    let mut auxes: Vec<&str> = Vec::new();
    let mut cursor = i;
    let mut to_index = None;
    while let Some(k) = prev_content(tokens, cursor) {
        let w = tokens[k].lower.as_str();
        match w {
            "will" | "shall" | "'ll" | "would" | "could" | "might" | "may" | "should" | "can" | "must" | "did"
            | "does" | "do" | "has" | "have" | "had" | "is" | "are" | "am" | "was" | "were" | "be" | "been"
            | "being" | "'s" => {
                auxes.push(w);
                cursor = k;
            }
            "to" if auxes.is_empty() => {
                to_index = Some(k);
                break;
            }
            _ => break,
        }
        if auxes.len() >= 3 {
            break;
        }
    }
    let be_forms = ["is", "are", "am", "was", "were", "be", "been", "being", "'s"];
    let passive = form.participle() && auxes.first().is_some_and(|a| be_forms.contains(a));

    if let Some(k) = to_index {
        // "agreed to buy", "plans to buy", "is expected to buy"
        let Some(g) = prev_content(tokens, k) else {
            return (Tense::Unknown, passive);
        };
        let governing = tokens[g].lower.as_str();
        let before = prev_content(tokens, g).map(|b| tokens[b].lower.as_str());
        let tense = if looks_past(governing) {
            match before {
                Some("is" | "are" | "am") => Tense::Future,
                _ => Tense::Past,
            }
        } else if matches!(before, Some("will" | "shall")) || looks_present(governing) {
            Tense::Future
        } else {
            Tense::Unknown
        };
        return (tense, passive);
    }

    let tense = match auxes.last() {
        Some(&("will" | "shall" | "'ll")) => Tense::Future,
        Some(a) if MODALS.contains(a) => Tense::Unknown,
        Some(&("did" | "had" | "was" | "were")) => Tense::Past,
        Some(&("has" | "have")) => Tense::Past,
        Some(&("is" | "are" | "am" | "does" | "do" | "'s")) => Tense::Present,
        Some(_) => Tense::Unknown,
        None => match form {
            Form::Past | Form::PastOrParticiple | Form::Participle => Tense::Past,
            Form::Base | Form::Third => Tense::Present,
            Form::Gerund => Tense::Unknown,
        },
    };
    (tense, passive)
}

pub fn recognize_predicates(text: &str, ontology: &Ontology, allow_noun: bool) -> Vec<PredicateMention> {
    let tokens = super::tokens::tokenize(text);
    predicates_in(&tokens, ontology, allow_noun)
}

pub fn predicates_in(tokens: &[Token], ontology: &Ontology, allow_noun: bool) -> Vec<PredicateMention> {
    let mut out = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        if tok.kind != TokenKind::Word || (i > 0 && tok.is_capitalized()) {
            continue;
        }
        let word = tok.lower.as_str();
        let prev = i.checked_sub(1).map(|k| &tokens[k]);
        let nominal_context = is_word(prev, DETERMINERS)
            || is_word(prev, NOUN_PREMODIFIERS)
            || prev.is_some_and(|p| p.kind == TokenKind::Number)
            || is_word(tokens.get(i + 1), &["of"]);

        let verb = if nominal_context {
            None
        } else {
            verb_readings(word)
                .into_iter()
                .find_map(|(lemma, form)| ontology.label_for_lemma(&lemma).map(|l| (l.to_string(), form)))
        };
        if let Some((label, form)) = verb {
            let (tense, passive) = verb_tense(tokens, i, form);
            out.push(PredicateMention {
                label,
                is_noun: false,
                tense,
                char_span: (tok.start, tok.end),
                passive,
            });
            continue;
        }
        if !allow_noun {
            continue;
        }
        if let Some(label) = singulars(word).iter().find_map(|n| ontology.noun_to_verb(n)) {
            out.push(PredicateMention {
                label: label.to_string(),
                is_noun: true,
                tense: Tense::Unknown,
                char_span: (tok.start, tok.end),
                passive: false,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::testing::fixture_ontology;

    fn tags(text: &str, nouns: bool) -> Vec<(String, bool, Tense)> {
        recognize_predicates(text, &fixture_ontology(), nouns)
            .into_iter()
            .map(|m| (m.label, m.is_noun, m.tense))
            .collect()
    }

    #[test]
    fn table_one_verbs() {
        assert_eq!(
            tags("Google bought YouTube in October for $1.65 billion.", false),
            vec![("buy".into(), false, Tense::Past)]
        );
        let agreed = tags(
            "Before Google agreed to buy YouTube for $1.65 billion in stock, it paid $1 billion for 5% of AOL.",
            false,
        );
        assert_eq!(
            agreed,
            vec![("buy".into(), false, Tense::Past), ("pay".into(), false, Tense::Past)]
        );
        let passive = recognize_predicates(
            "YouTube was purchased by Google in November for $1.6 billion.",
            &fixture_ontology(),
            false,
        );
        assert_eq!(passive.len(), 1);
        assert_eq!(passive[0].label, "purchase");
        assert!(passive[0].passive);
        assert_eq!(passive[0].tense, Tense::Past);
    }

    #[test]
    fn noun_flag() {
        assert_eq!(
            tags("Oracle completed the acquisition of PeopleSoft.", true),
            vec![("acquire".into(), true, Tense::Unknown)]
        );
        assert!(tags("Oracle completed the acquisition of PeopleSoft.", false).is_empty());
        assert_eq!(
            tags("the purchase of Beats", true),
            vec![("purchase".into(), true, Tense::Unknown)]
        );
        assert!(tags("the purchase of Beats", false).is_empty());
    }

    #[test]
    fn tenses() {
        assert_eq!(tags("Apple will acquire Beats", false)[0].2, Tense::Future);
        assert_eq!(tags("Apple plans to acquire Beats", false)[0].2, Tense::Future);
        assert_eq!(tags("Apple acquires Beats", false)[0].2, Tense::Present);
        assert_eq!(tags("Apple has acquired Beats", false)[0].2, Tense::Past);
        assert_eq!(tags("Apple could acquire Beats", false)[0].2, Tense::Unknown);
        assert_eq!(tags("Apple is buying Beats", false)[0].2, Tense::Present);
    }

    #[test]
    fn morphology() {
        assert_eq!(tags("it financed", false)[0].0, "finance");
        assert_eq!(tags("they are lending", false)[0].0, "lend");
        assert_eq!(tags("it netted", false)[0].0, "net");
        assert_eq!(tags("he subsidizes", false)[0].0, "subsidize");
        assert_eq!(tags("it profited", false)[0].0, "profit-gross");
        assert!(tags("a table", true).is_empty());
    }

    #[test]
    fn noun_forms_are_subset_of_noun_flag() {
        let s = "Oracle's bid and the takeover of PeopleSoft, which Oracle bought in 2004.";
        let without = tags(s, false);
        let with = tags(s, true);
        assert!(without.iter().all(|m| with.contains(m)));
        assert!(with.len() > without.len());
    }
}
