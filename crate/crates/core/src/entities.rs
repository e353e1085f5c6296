//! Entity repository: organizations with name variants and knowledge-base
//! URIs, resolved by most-prominent-sense lookup.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::jsonl::{self, JsonlError};

/// Trailing words dropped when generating short name variants.
pub const LEGAL_SUFFIXES: &[&str] = &[
    "inc",
    "incorporated",
    "corp",
    "corporation",
    "co",
    "company",
    "ltd",
    "limited",
    "llc",
    "plc",
    "lp",
    "llp",
    "ag",
    "sa",
    "nv",
    "gmbh",
    "technologies",
    "holdings",
    "group",
];

const LEADING_ARTICLES: &[&str] = &["the", "a", "an"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub entity_id: String,
    pub canonical_name: String,
    pub surface_forms: BTreeSet<String>,
    pub uris: BTreeSet<String>,
    pub has_description: bool,
    pub prominence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct KbLinks {
    pub dbpedia: bool,
    pub freebase: bool,
    pub crunchbase: bool,
}

impl EntityRecord {
    pub fn kb_links(&self) -> KbLinks {
        let mut links = KbLinks::default();
        for uri in &self.uris {
            let uri = uri.trim_start_matches('<').to_ascii_lowercase();
            if uri.starts_with("dbpedia:") || uri.contains("dbpedia.org") {
                links.dbpedia = true;
            } else if uri.starts_with("freebase:") || uri.contains("freebase.com") {
                links.freebase = true;
            } else if uri.starts_with("crunchbase:") || uri.contains("crunchbase.com") {
                links.crunchbase = true;
            }
        }
        links
    }
}

/// One line of the repository source file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawEntry {
    pub name: String,
    pub uris: Vec<String>,
    #[serde(default)]
    pub has_description: bool,
    #[serde(default)]
    pub prominence: f64,
}

/// Case-folded, punctuation stripped, whitespace collapsed.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split(|c: char| c.is_whitespace() || c == '-' || c == '/') {
        let cleaned: String = word
            .chars()
            .filter(|c| c.is_alphanumeric() || *c == '&')
            .flat_map(char::to_lowercase)
            .collect();
        if cleaned.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&cleaned);
    }
    out
}

fn bare(word: &str) -> String {
    word.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase()
}

fn strip_article(words: &[&str]) -> usize {
    match words.first() {
        Some(w) if words.len() > 1 && LEADING_ARTICLES.contains(&bare(w).as_str()) => 1,
        _ => 0,
    }
}

fn strip_suffixes(words: &[&str]) -> usize {
    let mut end = words.len();
    while end > 1 && LEGAL_SUFFIXES.contains(&bare(words[end - 1]).as_str()) {
        end -= 1;
    }
    end
}

fn join(words: &[&str]) -> String {
    words.join(" ").trim_end_matches(',').to_string()
}

/// The name without leading article or trailing legal suffixes.
pub fn core_form(name: &str) -> String {
    let words: Vec<&str> = name.split_whitespace().collect();
    let start = strip_article(&words);
    let end = strip_suffixes(&words[start..]) + start;
    let mut core = join(&words[start..end]);
    while core.ends_with(',') {
        core.pop();
    }
    core
}

/// Name variants: the name itself, without a leading article, without
/// legal suffixes, and the initialism of multi-word names.
pub fn expand_surface_forms(canonical_name: &str) -> BTreeSet<String> {
    let mut forms = BTreeSet::new();
    let name = canonical_name.split_whitespace().collect::<Vec<_>>().join(" ");
    if name.is_empty() {
        return forms;
    }
    forms.insert(name.clone());
    let words: Vec<&str> = name.split_whitespace().collect();
    let start = strip_article(&words);
    if start > 0 {
        forms.insert(join(&words[start..]));
    }
    let end = strip_suffixes(&words[start..]) + start;
    if end < words.len() {
        forms.insert(join(&words[start..end]));
    }
    let core = &words[start..end];
    let capitalized = core
        .iter()
        .filter(|w| w.chars().next().is_some_and(char::is_uppercase))
        .count();
    if core.len() >= 2 && capitalized >= 2 {
        let initialism: String = core
            .iter()
            .filter_map(|w| w.chars().next())
            .filter(|c| c.is_uppercase())
            .collect();
        if initialism.chars().count() >= 2 {
            forms.insert(initialism);
        }
    }
    forms
}

#[derive(Debug, thiserror::Error)]
pub enum RepositoryError {
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
    #[error("duplicate entity id {0:?}")]
    DuplicateId(String),
    #[error("entity {0:?} has no URIs")]
    NoUris(String),
}

#[derive(Debug, Clone, Default)]
pub struct EntityRepository {
    records: BTreeMap<String, EntityRecord>,
    /// normalized surface form -> ids ranked by (prominence desc, id asc)
    surface_index: HashMap<String, Vec<String>>,
    max_form_tokens: usize,
}

fn slug(text: &str) -> String {
    let mut out = String::new();
    for c in text.chars().flat_map(char::to_lowercase) {
        if c.is_ascii_alphanumeric() {
            out.push(c);
        } else if !out.ends_with('-') && !out.is_empty() {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    if out.is_empty() {
        "entity".to_string()
    } else {
        out
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut cur = x;
        while self.0[cur] != root {
            let next = self.0[cur];
            self.0[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// Groups raw entries that share a normalized core name (or where one
/// entry's core name is a variant of the other) into single records.
///
/// The result does not depend on input order.
pub fn merge_records(raw: &[RawEntry]) -> EntityRepository {
    let entries: Vec<&RawEntry> = raw
        .iter()
        .filter(|e| {
            let keep = !e.uris.is_empty() && !e.name.trim().is_empty();
            if !keep {
                log::warn!("dropping entity entry {:?} without name or URIs", e.name);
            }
            keep
        })
        .collect();
    let cores: Vec<String> = entries.iter().map(|e| normalize(&core_form(&e.name))).collect();
    let expansions: Vec<BTreeSet<String>> = entries
        .iter()
        .map(|e| expand_surface_forms(&e.name).iter().map(|f| normalize(f)).collect())
        .collect();

    let mut by_form: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, forms) in expansions.iter().enumerate() {
        for f in forms {
            by_form.entry(f.as_str()).or_default().push(i);
        }
    }
    let mut uf = UnionFind((0..entries.len()).collect());
    for (i, core) in cores.iter().enumerate() {
        if let Some(js) = by_form.get(core.as_str()) {
            for &j in js {
                uf.union(i, j);
            }
        }
    }

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..entries.len() {
        let root = uf.find(i);
        groups.entry(root).or_default().push(i);
    }

    let mut drafts: Vec<EntityRecord> = groups
        .into_values()
        .map(|members| {
            let chosen = *members
                .iter()
                .max_by(|&&a, &&b| {
                    entries[a]
                        .prominence
                        .total_cmp(&entries[b].prominence)
                        .then_with(|| entries[b].name.cmp(&entries[a].name))
                })
                .expect("non-empty group");
            let mut record = EntityRecord {
                entity_id: String::new(),
                canonical_name: entries[chosen].name.split_whitespace().collect::<Vec<_>>().join(" "),
                surface_forms: BTreeSet::new(),
                uris: BTreeSet::new(),
                has_description: false,
                prominence: f64::NEG_INFINITY,
            };
            for &m in &members {
                let e = entries[m];
                record.surface_forms.extend(expand_surface_forms(&e.name));
                record.uris.extend(e.uris.iter().map(|u| u.trim().to_string()));
                record.has_description |= e.has_description;
                record.prominence = record.prominence.max(e.prominence);
            }
            record
        })
        .collect();

    drafts.sort_by(|a, b| {
        core_form(&a.canonical_name)
            .cmp(&core_form(&b.canonical_name))
            .then_with(|| a.canonical_name.cmp(&b.canonical_name))
            .then_with(|| a.uris.cmp(&b.uris))
    });
    let mut records = BTreeMap::new();
    for mut record in drafts {
        let base = slug(&core_form(&record.canonical_name));
        let mut id = base.clone();
        let mut n = 2;
        while records.contains_key(&id) {
            id = format!("{base}-{n}");
            n += 1;
        }
        record.entity_id = id.clone();
        records.insert(id, record);
    }
    EntityRepository::from_map(records)
}

impl EntityRepository {
    fn from_map(records: BTreeMap<String, EntityRecord>) -> Self {
        let mut surface_index: HashMap<String, Vec<String>> = HashMap::new();
        let mut max_form_tokens = 0;
        for record in records.values() {
            for form in &record.surface_forms {
                let key = normalize(form);
                if key.is_empty() {
                    continue;
                }
                max_form_tokens = max_form_tokens.max(key.split(' ').count());
                let ids = surface_index.entry(key).or_default();
                if !ids.contains(&record.entity_id) {
                    ids.push(record.entity_id.clone());
                }
            }
        }
        for ids in surface_index.values_mut() {
            ids.sort_by(|a, b| {
                records[b]
                    .prominence
                    .total_cmp(&records[a].prominence)
                    .then_with(|| a.cmp(b))
            });
        }
        EntityRepository {
            records,
            surface_index,
            max_form_tokens,
        }
    }

    pub fn from_records(records: impl IntoIterator<Item = EntityRecord>) -> Result<Self, RepositoryError> {
        let mut map = BTreeMap::new();
        for r in records {
            if r.uris.is_empty() {
                return Err(RepositoryError::NoUris(r.entity_id));
            }
            if map.contains_key(&r.entity_id) {
                return Err(RepositoryError::DuplicateId(r.entity_id));
            }
            map.insert(r.entity_id.clone(), r);
        }
        Ok(EntityRepository::from_map(map))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RepositoryError> {
        let records: Vec<EntityRecord> = jsonl::read_all(path)?;
        EntityRepository::from_records(records)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), RepositoryError> {
        jsonl::write_all(path, self.records.values())?;
        Ok(())
    }

    pub fn load_source(path: impl AsRef<Path>) -> Result<Vec<RawEntry>, RepositoryError> {
        Ok(jsonl::read_all(path)?)
    }

    pub fn get(&self, id: &str) -> Option<&EntityRecord> {
        self.records.get(id)
    }

    pub fn records(&self) -> impl Iterator<Item = &EntityRecord> {
        self.records.values()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Longest surface form, in tokens.
    pub fn max_form_tokens(&self) -> usize {
        self.max_form_tokens
    }

    /// Every candidate for a span, best first.
    pub fn candidates(&self, span_text: &str) -> impl Iterator<Item = &EntityRecord> {
        self.surface_index
            .get(&normalize(span_text))
            .into_iter()
            .flatten()
            .map(|id| &self.records[id])
    }

    pub fn resolve_mention(&self, span_text: &str, require_description: bool) -> Option<&EntityRecord> {
        self.candidates(span_text)
            .find(|r| !require_description || r.has_description)
    }

    /// Records with a surface form starting with `prefix`, by prominence.
    pub fn search_prefix(&self, prefix: &str, limit: usize) -> Vec<&EntityRecord> {
        let key = normalize(prefix);
        if key.is_empty() {
            return Vec::new();
        }
        let mut hits: Vec<&EntityRecord> = self
            .records
            .values()
            .filter(|r| r.surface_forms.iter().any(|f| normalize(f).starts_with(&key)))
            .collect();
        hits.sort_by(|a, b| {
            b.prominence
                .total_cmp(&a.prominence)
                .then_with(|| a.entity_id.cmp(&b.entity_id))
        });
        hits.truncate(limit);
        hits
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(name: &str, uris: &[&str], desc: bool, prominence: f64) -> RawEntry {
        RawEntry {
            name: name.into(),
            uris: uris.iter().map(|s| s.to_string()).collect(),
            has_description: desc,
            prominence,
        }
    }

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn variants() {
        let nyt = expand_surface_forms("The New York Times");
        assert!(nyt.contains("The New York Times"));
        assert!(nyt.contains("New York Times"));
        assert!(nyt.contains("NYT"));
        assert!(expand_surface_forms("Skype Technologies").contains("Skype"));
        assert_eq!(expand_surface_forms("Apple"), set(&["Apple"]));
        assert!(expand_surface_forms("Acme Corp.").contains("Acme"));
        assert!(expand_surface_forms("Acme Holdings, Inc.").contains("Acme"));
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize("  Skype   Limited. "), "skype limited");
        assert_eq!(normalize("AT&T"), "at&t");
        assert_eq!(normalize("Hewlett-Packard"), "hewlett packard");
    }

    fn skype() -> Vec<RawEntry> {
        vec![
            entry("Skype Technologies", &["<dbpedia:Skype_Technologies>"], true, 40.0),
            entry("Skype", &["<crunchbase:org/skype>", "<freebase:m/06whf7>"], false, 10.0),
            entry(
                "Skype Limited",
                &["<crunchbase:org/skype-technologies>", "<freebase:m/026wfg>"],
                false,
                5.0,
            ),
        ]
    }

    #[test]
    fn merge_multi_kb_entry() {
        let repo = merge_records(&skype());
        assert_eq!(repo.len(), 1);
        let r = repo.records().next().unwrap();
        assert_eq!(r.entity_id, "skype");
        assert_eq!(r.uris.len(), 5);
        assert!(r.has_description);
        assert_eq!(r.prominence, 40.0);
        for f in ["Skype", "Skype Technologies", "Skype Limited"] {
            assert!(r.surface_forms.contains(f), "{f}");
        }
        assert!(r.surface_forms.contains(&r.canonical_name));
        let links = r.kb_links();
        assert!(links.dbpedia && links.freebase && links.crunchbase);
        assert_eq!(repo.resolve_mention("Skype Limited", false).unwrap().entity_id, "skype");
    }

    #[test]
    fn disjoint_entries_stay_apart() {
        let repo = merge_records(&[
            entry("Acme Corp", &["dbpedia:Acme"], true, 1.0),
            entry("Zeta Ltd", &["dbpedia:Zeta"], true, 1.0),
        ]);
        assert_eq!(repo.len(), 2);
        assert!(repo.get("acme").is_some());
        assert!(repo.get("zeta").is_some());
    }

    #[test]
    fn unknown_mention() {
        let repo = merge_records(&skype());
        assert!(repo.resolve_mention("Xqzzt Inc", false).is_none());
    }

    #[test]
    fn ambiguous_form_prefers_prominence() {
        // "Apex" is a variant of both records but neither core matches the other
        let repo = EntityRepository::from_records([
            EntityRecord {
                entity_id: "apex-a".into(),
                canonical_name: "Apex A".into(),
                surface_forms: set(&["Apex A", "Apex"]),
                uris: set(&["dbpedia:Apex_A"]),
                has_description: false,
                prominence: 5.0,
            },
            EntityRecord {
                entity_id: "apex-b".into(),
                canonical_name: "Apex B".into(),
                surface_forms: set(&["Apex B", "Apex"]),
                uris: set(&["dbpedia:Apex_B"]),
                has_description: true,
                prominence: 2.0,
            },
        ])
        .unwrap();
        assert_eq!(repo.resolve_mention("apex", false).unwrap().entity_id, "apex-a");
        assert_eq!(repo.resolve_mention("apex", true).unwrap().entity_id, "apex-b");
    }

    #[test]
    fn acronym_merges_with_full_name() {
        let repo = merge_records(&[
            entry("The New York Times", &["dbpedia:The_New_York_Times"], true, 50.0),
            entry("NYT", &["freebase:m/07k2d"], false, 1.0),
        ]);
        assert_eq!(repo.len(), 1);
        assert_eq!(
            repo.resolve_mention("NYT", false).unwrap().canonical_name,
            "The New York Times"
        );
    }

    #[test]
    fn prefix_search() {
        let mut raw = skype();
        raw.push(entry("Skyline Partners", &["crunchbase:org/skyline"], false, 1.0));
        let repo = merge_records(&raw);
        let hits: Vec<_> = repo
            .search_prefix("Sky", 10)
            .iter()
            .map(|r| r.entity_id.clone())
            .collect();
        assert_eq!(hits, vec!["skype", "skyline-partners"]);
        assert!(repo.search_prefix("", 10).is_empty());
    }

    fn ten_entries() -> Vec<RawEntry> {
        vec![
            entry("Skype Technologies", &["dbpedia:Skype_Technologies"], true, 40.0),
            entry("Skype", &["crunchbase:org/skype"], false, 10.0),
            entry("Skype Limited", &["freebase:m/026wfg"], false, 5.0),
            entry("Oracle Corporation", &["dbpedia:Oracle_Corporation"], true, 90.0),
            entry("Oracle", &["crunchbase:org/oracle"], false, 30.0),
            entry("PeopleSoft", &["dbpedia:PeopleSoft"], true, 20.0),
            entry("PeopleSoft Inc.", &["freebase:m/0peo"], false, 2.0),
            entry("The New York Times", &["dbpedia:The_New_York_Times"], true, 50.0),
            entry("NYT", &["freebase:m/07k2d"], false, 1.0),
            entry("Acme Corp", &["crunchbase:org/acme"], false, 1.0),
        ]
    }

    fn snapshot(repo: &EntityRepository) -> Vec<EntityRecord> {
        repo.records().cloned().collect()
    }

    #[test]
    fn merge_is_order_independent_over_permutations() {
        let base = ten_entries();
        let expected = snapshot(&merge_records(&base));
        assert_eq!(expected.len(), 5);
        // all rotations plus reversals of each rotation
        for shift in 0..base.len() {
            let mut rotated = base.clone();
            rotated.rotate_left(shift);
            assert_eq!(snapshot(&merge_records(&rotated)), expected);
            rotated.reverse();
            assert_eq!(snapshot(&merge_records(&rotated)), expected);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn permutation_invariance(perm in Just((0..10usize).collect::<Vec<_>>()).prop_shuffle()) {
                let base = ten_entries();
                let shuffled: Vec<RawEntry> = perm.iter().map(|&i| base[i].clone()).collect();
                prop_assert_eq!(snapshot(&merge_records(&shuffled)), snapshot(&merge_records(&base)));
            }

            #[test]
            fn every_surface_form_resolves(perm in Just((0..10usize).collect::<Vec<_>>()).prop_shuffle(), probe in "[A-Za-z ]{1,12}") {
                let base = ten_entries();
                let shuffled: Vec<RawEntry> = perm.iter().map(|&i| base[i].clone()).collect();
                let repo = merge_records(&shuffled);
                for r in repo.records() {
                    for f in &r.surface_forms {
                        prop_assert!(repo.resolve_mention(f, false).is_some());
                    }
                }
                if let Some(strict) = repo.resolve_mention(&probe, true) {
                    let ids: Vec<_> = repo.candidates(&probe).map(|r| r.entity_id.clone()).collect();
                    prop_assert!(ids.contains(&strict.entity_id));
                    prop_assert!(repo.resolve_mention(&probe, false).is_some());
                }
            }
        }
    }
}
