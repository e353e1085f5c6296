//! Ontology of economic events.
//!
//! Predicates hang under two event classes, `Increment` and `Decrement`,
//! in a forest at most five levels deep. Two predicates describe the same
//! kind of event when they share their level-2 ancestor.
//!
//! The ontology is built from a list of seed verbs and a plain-text lexical
//! resource:
//!
//! ```text
//! hypernym <child> <parent>
//! adjacent <a> <b>
//! ```
//!
//! followed by an optional overlay of manual revisions:
//!
//! ```text
//! reparent <label> <new-parent | ->
//! add <label> <parent>
//! add <label> - <increment | decrement>
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::jsonl::{self, JsonlError};

pub const MAX_DEPTH: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EventClass {
    Increment,
    Decrement,
}

impl FromStr for EventClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "increment" | "incrementeventtype" => Ok(EventClass::Increment),
            "decrement" | "decrementeventtype" => Ok(EventClass::Decrement),
            other => Err(format!("unknown event class {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Seed,
    Hypernym,
    Adjacent,
    Manual,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateNode {
    pub label: String,
    pub parent: Option<String>,
    pub event_class: EventClass,
    pub level: u32,
    pub origin: Origin,
}

#[derive(Debug, thiserror::Error)]
pub enum OntologyError {
    #[error("unregistered predicate {0:?}")]
    UnknownPredicate(String),
    #[error("cycle in hierarchy through {0:?}")]
    Cycle(String),
    #[error("predicate {label:?} sits at level {level}, deeper than {MAX_DEPTH}")]
    TooDeep { label: String, level: u32 },
    #[error("{0}")]
    Invalid(String),
    #[error("{path}:{line}: {message}")]
    Syntax { path: String, line: usize, message: String },
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Seed {
    pub label: String,
    pub event_class: EventClass,
}

#[derive(Debug, Clone, Default)]
pub struct LexicalResource {
    /// child -> parent, first edge per child wins
    hypernyms: BTreeMap<String, String>,
    adjacent: Vec<(String, String)>,
}

impl LexicalResource {
    pub fn add_hypernym(&mut self, child: &str, parent: &str) {
        self.hypernyms
            .entry(child.to_string())
            .or_insert_with(|| parent.to_string());
    }

    pub fn add_adjacent(&mut self, a: &str, b: &str) {
        self.adjacent.push((a.to_string(), b.to_string()));
    }

    fn mentions(&self, label: &str) -> bool {
        self.hypernyms.contains_key(label)
            || self.hypernyms.values().any(|p| p == label)
            || self.adjacent.iter().any(|(a, b)| a == label || b == label)
    }

    fn adjacent_to<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.adjacent.iter().filter_map(move |(a, b)| {
            if a == label {
                Some(b.as_str())
            } else if b == label {
                Some(a.as_str())
            } else {
                None
            }
        })
    }

    /// The seed followed by its hypernyms, most general last.
    fn chain(&self, label: &str) -> Result<Vec<String>, OntologyError> {
        let mut chain = vec![label.to_string()];
        let mut current = label;
        while let Some(parent) = self.hypernyms.get(current) {
            if chain.iter().any(|c| c == parent) {
                return Err(OntologyError::Cycle(parent.clone()));
            }
            chain.push(parent.clone());
            current = parent;
        }
        Ok(chain)
    }

    fn check_acyclic(&self) -> Result<(), OntologyError> {
        for child in self.hypernyms.keys() {
            self.chain(child)?;
        }
        Ok(())
    }

    pub fn parse(text: &str, path: &str) -> Result<Self, OntologyError> {
        let mut res = LexicalResource::default();
        for (idx, line) in data_lines(text) {
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["hypernym", child, parent] => res.add_hypernym(child, parent),
                ["adjacent", a, b] => res.add_adjacent(a, b),
                _ => {
                    return Err(OntologyError::Syntax {
                        path: path.to_string(),
                        line: idx,
                        message: format!("expected `hypernym C P` or `adjacent A B`, got {line:?}"),
                    })
                }
            }
        }
        Ok(res)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OverlayDirective {
    Reparent {
        label: String,
        parent: Option<String>,
    },
    Add {
        label: String,
        parent: Option<String>,
        event_class: Option<EventClass>,
    },
}

pub fn parse_overlay(text: &str, path: &str) -> Result<Vec<OverlayDirective>, OntologyError> {
    let syntax = |line: usize, message: String| OntologyError::Syntax {
        path: path.to_string(),
        line,
        message,
    };
    let parent_of = |p: &str| (p != "-").then(|| p.to_string());
    let mut out = Vec::new();
    for (idx, line) in data_lines(text) {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let directive = match parts.as_slice() {
            ["reparent", label, parent] => OverlayDirective::Reparent {
                label: label.to_string(),
                parent: parent_of(parent),
            },
            ["add", label, parent] => OverlayDirective::Add {
                label: label.to_string(),
                parent: parent_of(parent),
                event_class: None,
            },
            ["add", label, "-", class] => OverlayDirective::Add {
                label: label.to_string(),
                parent: None,
                event_class: Some(class.parse().map_err(|e| syntax(idx, e))?),
            },
            _ => return Err(syntax(idx, format!("unrecognized overlay directive {line:?}"))),
        };
        out.push(directive);
    }
    Ok(out)
}

pub fn parse_seeds(text: &str, path: &str) -> Result<Vec<Seed>, OntologyError> {
    let mut seeds = Vec::new();
    for (idx, line) in data_lines(text) {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [label, class] = parts.as_slice() else {
            return Err(OntologyError::Syntax {
                path: path.to_string(),
                line: idx,
                message: format!("expected `<verb> <increment|decrement>`, got {line:?}"),
            });
        };
        let event_class = class.parse().map_err(|message| OntologyError::Syntax {
            path: path.to_string(),
            line: idx,
            message,
        })?;
        seeds.push(Seed {
            label: label.to_lowercase(),
            event_class,
        });
    }
    Ok(seeds)
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triple {
    pub subject: String,
    pub relation: String,
    pub object: String,
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.subject, self.relation, self.object)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ontology {
    nodes: BTreeMap<String, PredicateNode>,
    noun_lexicon: BTreeMap<String, String>,
    /// surface lemma (label up to the first hyphen) -> label
    surface: HashMap<String, String>,
}

#[derive(Debug)]
pub struct BuildOutcome {
    pub ontology: Ontology,
    pub diagnostics: Vec<String>,
}

/// Seeds, their hypernym chains and adjacent terms, then the overlay.
pub fn build_ontology(
    seeds: &[Seed],
    resource: &LexicalResource,
    overlay: &[OverlayDirective],
) -> Result<BuildOutcome, OntologyError> {
    resource.check_acyclic()?;
    let mut nodes: BTreeMap<String, PredicateNode> = BTreeMap::new();
    let mut diagnostics = Vec::new();

    for seed in seeds {
        if !resource.mentions(&seed.label) {
            diagnostics.push(format!(
                "seed {:?} not found in lexical resource; attached at level 1",
                seed.label
            ));
            nodes.entry(seed.label.clone()).or_insert_with(|| PredicateNode {
                label: seed.label.clone(),
                parent: None,
                event_class: seed.event_class,
                level: 1,
                origin: Origin::Seed,
            });
            continue;
        }
        let chain = resource.chain(&seed.label)?;
        // insert from the most general term down
        let mut parent: Option<String> = None;
        for label in chain.iter().rev() {
            let is_seed = *label == seed.label;
            match nodes.get_mut(label) {
                Some(existing) => {
                    if is_seed {
                        existing.origin = Origin::Seed;
                    }
                    if existing.event_class != seed.event_class {
                        diagnostics.push(format!(
                            "{label:?} already placed under {:?}; seed {:?} asks for {:?}",
                            existing.event_class, seed.label, seed.event_class
                        ));
                    }
                }
                None => {
                    nodes.insert(
                        label.clone(),
                        PredicateNode {
                            label: label.clone(),
                            parent: parent.clone(),
                            event_class: seed.event_class,
                            level: 0,
                            origin: if is_seed { Origin::Seed } else { Origin::Hypernym },
                        },
                    );
                }
            }
            parent = Some(label.clone());
        }
        let seed_parent = nodes[&seed.label].parent.clone();
        for term in resource.adjacent_to(&seed.label) {
            if !nodes.contains_key(term) {
                nodes.insert(
                    term.to_string(),
                    PredicateNode {
                        label: term.to_string(),
                        parent: seed_parent.clone(),
                        event_class: seed.event_class,
                        level: 0,
                        origin: Origin::Adjacent,
                    },
                );
            }
        }
    }

    for directive in overlay {
        apply_overlay(&mut nodes, directive, &mut diagnostics)?;
    }

    let ontology = Ontology::from_parents(nodes, BTreeMap::new())?;
    Ok(BuildOutcome { ontology, diagnostics })
}

fn apply_overlay(
    nodes: &mut BTreeMap<String, PredicateNode>,
    directive: &OverlayDirective,
    diagnostics: &mut Vec<String>,
) -> Result<(), OntologyError> {
    match directive {
        OverlayDirective::Reparent { label, parent } => {
            if !nodes.contains_key(label) {
                diagnostics.push(format!("overlay: cannot reparent unknown {label:?}"));
                return Ok(());
            }
            if let Some(p) = parent {
                if !nodes.contains_key(p) {
                    return Err(OntologyError::UnknownPredicate(p.clone()));
                }
                // the new parent must not be inside the moved subtree
                let mut cursor = Some(p.clone());
                while let Some(c) = cursor {
                    if c == *label {
                        return Err(OntologyError::Cycle(label.clone()));
                    }
                    cursor = nodes[&c].parent.clone();
                }
            }
            let node = nodes.get_mut(label).expect("checked above");
            node.parent = parent.clone();
            node.origin = Origin::Manual;
        }
        OverlayDirective::Add {
            label,
            parent,
            event_class,
        } => {
            if nodes.contains_key(label) {
                diagnostics.push(format!("overlay: {label:?} already present"));
                return Ok(());
            }
            let class = match (parent, event_class) {
                (Some(p), _) => {
                    nodes
                        .get(p)
                        .ok_or_else(|| OntologyError::UnknownPredicate(p.clone()))?
                        .event_class
                }
                (None, Some(c)) => *c,
                (None, None) => {
                    return Err(OntologyError::Invalid(format!(
                        "overlay: root {label:?} needs an event class"
                    )))
                }
            };
            nodes.insert(
                label.clone(),
                PredicateNode {
                    label: label.clone(),
                    parent: parent.clone(),
                    event_class: class,
                    level: 0,
                    origin: Origin::Manual,
                },
            );
        }
    }
    Ok(())
}

impl Ontology {
    /// Recomputes levels from parent links; descendants take their root's class.
    fn from_parents(
        mut nodes: BTreeMap<String, PredicateNode>,
        noun_lexicon: BTreeMap<String, String>,
    ) -> Result<Self, OntologyError> {
        let labels: Vec<String> = nodes.keys().cloned().collect();
        let mut resolved: HashMap<String, (u32, EventClass)> = HashMap::new();
        for label in &labels {
            let mut path = vec![label.clone()];
            let mut cursor = nodes[label].parent.clone();
            while let Some(p) = cursor {
                if path.contains(&p) {
                    return Err(OntologyError::Cycle(p));
                }
                if resolved.contains_key(&p) {
                    path.push(p);
                    break;
                }
                let node = nodes
                    .get(&p)
                    .ok_or_else(|| OntologyError::UnknownPredicate(p.clone()))?;
                cursor = node.parent.clone();
                path.push(p);
            }
            let top = path.last().expect("non-empty");
            let (mut level, class) = match resolved.get(top) {
                Some(&(l, c)) => (l, c),
                None => (1, nodes[top].event_class),
            };
            resolved.insert(top.clone(), (level, class));
            for l in path.iter().rev().skip(1) {
                level += 1;
                resolved.insert(l.clone(), (level, class));
            }
        }
        for (label, node) in nodes.iter_mut() {
            let (level, class) = resolved[label];
            node.level = level;
            node.event_class = class;
        }
        let ontology = Ontology::assemble(nodes, noun_lexicon);
        ontology.validate()?;
        Ok(ontology)
    }

    fn assemble(nodes: BTreeMap<String, PredicateNode>, noun_lexicon: BTreeMap<String, String>) -> Self {
        let mut surface: HashMap<String, String> = HashMap::new();
        for label in nodes.keys() {
            let key = label.split('-').next().unwrap_or(label).to_string();
            match surface.get(&key) {
                Some(existing) if *existing == key => {}
                Some(_) if *label != key => {}
                _ => {
                    surface.insert(key, label.clone());
                }
            }
        }
        Ontology {
            nodes,
            noun_lexicon,
            surface,
        }
    }

    /// Unique labels, parents present, `level == parent.level + 1`, depth
    /// bound, noun targets registered.
    pub fn validate(&self) -> Result<(), OntologyError> {
        for node in self.nodes.values() {
            match &node.parent {
                None if node.level != 1 => {
                    return Err(OntologyError::Invalid(format!(
                        "root {:?} must be at level 1, found {}",
                        node.label, node.level
                    )))
                }
                None => {}
                Some(p) => {
                    let parent = self
                        .nodes
                        .get(p)
                        .ok_or_else(|| OntologyError::UnknownPredicate(p.clone()))?;
                    if node.level != parent.level + 1 {
                        return Err(OntologyError::Invalid(format!(
                            "{:?} at level {} under {:?} at level {}",
                            node.label, node.level, p, parent.level
                        )));
                    }
                    if node.event_class != parent.event_class {
                        return Err(OntologyError::Invalid(format!(
                            "{:?} and its parent {:?} disagree on event class",
                            node.label, p
                        )));
                    }
                }
            }
            if node.level > MAX_DEPTH {
                return Err(OntologyError::TooDeep {
                    label: node.label.clone(),
                    level: node.level,
                });
            }
        }
        for (noun, verb) in &self.noun_lexicon {
            if !self.nodes.contains_key(verb) {
                return Err(OntologyError::Invalid(format!(
                    "noun {noun:?} maps to unregistered predicate {verb:?}"
                )));
            }
        }
        Ok(())
    }

    pub fn from_nodes(
        nodes: impl IntoIterator<Item = PredicateNode>,
        noun_lexicon: BTreeMap<String, String>,
    ) -> Result<Self, OntologyError> {
        let mut map = BTreeMap::new();
        for node in nodes {
            if map.contains_key(&node.label) {
                return Err(OntologyError::Invalid(format!("duplicate label {:?}", node.label)));
            }
            map.insert(node.label.clone(), node);
        }
        let ontology = Ontology::assemble(map, noun_lexicon);
        ontology.validate()?;
        Ok(ontology)
    }

    pub fn with_noun_lexicon(self, noun_lexicon: BTreeMap<String, String>) -> Result<Self, OntologyError> {
        let ontology = Ontology::assemble(self.nodes, noun_lexicon);
        ontology.validate()?;
        Ok(ontology)
    }

    /// Loads the node file and, optionally, a tab-separated noun lexicon.
    pub fn load(path: impl AsRef<Path>, nouns: Option<&Path>) -> Result<Self, OntologyError> {
        let nodes: Vec<PredicateNode> = jsonl::read_all(path)?;
        let lexicon = match nouns {
            Some(p) => load_noun_lexicon(p)?,
            None => BTreeMap::new(),
        };
        Ontology::from_nodes(nodes, lexicon)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), OntologyError> {
        jsonl::write_all(path, self.nodes.values())?;
        Ok(())
    }

    pub fn nodes(&self) -> impl Iterator<Item = &PredicateNode> {
        self.nodes.values()
    }

    pub fn node(&self, label: &str) -> Option<&PredicateNode> {
        self.nodes.get(label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.nodes.contains_key(label)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn noun_lexicon(&self) -> &BTreeMap<String, String> {
        &self.noun_lexicon
    }

    pub fn max_level(&self) -> u32 {
        self.nodes.values().map(|n| n.level).max().unwrap_or(0)
    }

    /// The label a surface lemma stands for, e.g. `profit` -> `profit-gross`.
    pub fn label_for_lemma(&self, lemma: &str) -> Option<&str> {
        self.surface.get(lemma).map(String::as_str)
    }

    pub fn noun_to_verb(&self, noun: &str) -> Option<&str> {
        self.noun_lexicon.get(noun).map(String::as_str)
    }

    /// The level-2 ancestor of `label`, or the label itself at levels 1 and 2.
    pub fn second_level_ancestor<'a>(&'a self, label: &str) -> Result<&'a str, OntologyError> {
        let mut node = self
            .nodes
            .get(label)
            .ok_or_else(|| OntologyError::UnknownPredicate(label.to_string()))?;
        while node.level > 2 {
            let parent = node.parent.as_ref().expect("validated: level > 1 has a parent");
            node = &self.nodes[parent];
        }
        Ok(&node.label)
    }

    pub fn predicates_equivalent(&self, a: &str, b: &str) -> Result<bool, OntologyError> {
        Ok(self.second_level_ancestor(a)? == self.second_level_ancestor(b)?)
    }

    /// All distinct level-2 classes (level-1 leaves count as their own class).
    pub fn predicate_classes(&self) -> BTreeSet<&str> {
        self.nodes
            .keys()
            .filter_map(|l| self.second_level_ancestor(l).ok())
            .collect()
    }

    pub fn export_event_triples(
        &self,
        subject: &str,
        predicate: &str,
        object: &str,
        event_id: &str,
    ) -> Result<[Triple; 3], OntologyError> {
        let node = self
            .nodes
            .get(predicate)
            .ok_or_else(|| OntologyError::UnknownPredicate(predicate.to_string()))?;
        let flow = match node.event_class {
            EventClass::Increment => "inflow",
            EventClass::Decrement => "outflow",
        };
        let triple = |s: &str, r: &str, o: &str| Triple {
            subject: s.to_string(),
            relation: r.to_string(),
            object: o.to_string(),
        };
        Ok([
            triple(subject, "participates", event_id),
            triple(event_id, "isClassified", predicate),
            triple(event_id, flow, object),
        ])
    }
}

pub fn parse_noun_lexicon(text: &str, path: &str) -> Result<BTreeMap<String, String>, OntologyError> {
    let mut map = BTreeMap::new();
    for (idx, line) in data_lines(text) {
        let Some((noun, verb)) = line.split_once('\t') else {
            return Err(OntologyError::Syntax {
                path: path.to_string(),
                line: idx,
                message: format!("expected `noun<TAB>verb`, got {line:?}"),
            });
        };
        map.insert(noun.trim().to_lowercase(), verb.trim().to_lowercase());
    }
    Ok(map)
}

pub fn load_noun_lexicon(path: &Path) -> Result<BTreeMap<String, String>, OntologyError> {
    let text = read_text(path)?;
    parse_noun_lexicon(&text, &path.display().to_string())
}

pub(crate) fn read_text(path: &Path) -> Result<String, OntologyError> {
    fs::read_to_string(path).map_err(|source| OntologyError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Paths of the four ontology sources.
#[derive(Debug, Clone)]
pub struct OntologySources<'a> {
    pub seeds: &'a Path,
    pub lexical_resource: &'a Path,
    pub overlay: Option<&'a Path>,
    pub nouns: Option<&'a Path>,
}

pub fn build_from_files(sources: &OntologySources<'_>) -> Result<BuildOutcome, OntologyError> {
    let seeds = parse_seeds(&read_text(sources.seeds)?, &sources.seeds.display().to_string())?;
    let resource = LexicalResource::parse(
        &read_text(sources.lexical_resource)?,
        &sources.lexical_resource.display().to_string(),
    )?;
    let overlay = match sources.overlay {
        Some(p) => parse_overlay(&read_text(p)?, &p.display().to_string())?,
        None => Vec::new(),
    };
    let mut outcome = build_ontology(&seeds, &resource, &overlay)?;
    if let Some(nouns) = sources.nouns {
        outcome.ontology = outcome.ontology.with_noun_lexicon(load_noun_lexicon(nouns)?)?;
    }
    Ok(outcome)
}
