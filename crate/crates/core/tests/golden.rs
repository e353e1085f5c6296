use std::path::PathBuf;

use econ_events::annotate::{AnnotatedSentence, Annotator, AnnotatorConfig};
use econ_events::corpus::{corpus_predicate_frequencies, load_corpus};
use econ_events::entities::{merge_records, EntityRepository};
use econ_events::events::{EventCandidates, EventKey};
use econ_events::ontology::{build_from_files, Ontology, OntologySources};
use econ_events::pipeline::extract_events;
use econ_events::selection::{select_earliest, select_latest};

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn ontology() -> Ontology {
    let (seeds, lex, overlay, nouns) = (
        data("ontology/seeds.tsv"),
        data("ontology/lexical.txt"),
        data("ontology/overlay.txt"),
        data("ontology/nouns.tsv"),
    );
    build_from_files(&OntologySources {
        seeds: &seeds,
        lexical_resource: &lex,
        overlay: Some(&overlay),
        nouns: Some(&nouns),
    })
    .unwrap()
    .ontology
}

fn repository() -> EntityRepository {
    merge_records(&EntityRepository::load_source(data("entities/source.jsonl")).unwrap())
}

fn run(corpus: &str, noun_predicates: bool) -> (Vec<AnnotatedSentence>, Vec<EventCandidates>) {
    let ontology = ontology();
    let repository = repository();
    let docs = load_corpus(data(corpus)).unwrap().documents;
    let stats = corpus_predicate_frequencies(&docs, &ontology);
    let annotator = Annotator {
        ontology: &ontology,
        repository: &repository,
        stats: &stats,
        config: AnnotatorConfig {
            noun_predicates,
            ..AnnotatorConfig::default()
        },
    };
    let annotated = annotator.annotate_corpus(&docs).sentences;
    let events = extract_events(&annotated, &ontology).unwrap();
    (annotated, events)
}

#[test]
fn table_one_forms_a_single_event() {
    let (annotated, events) = run("fixtures/table1_corpus.jsonl", false);
    let keys: Vec<&EventKey> = events.iter().map(|e| &e.key).collect();
    assert_eq!(keys.len(), 1, "{keys:?}");
    assert_eq!(keys[0].id(), "google~buy~youtube");
    let passive = annotated.iter().find(|a| a.doc_id == "t1-b").unwrap();
    assert!(passive.predicate.passive);
    assert_eq!(passive.subject.entity_id, "google");
    assert_eq!(passive.object.entity_id, "youtube");
    // one candidate per (value, date) pair of the three sentences
    assert_eq!(events[0].candidates.len(), 1 + 1 + 2);
}

#[test]
fn table_five_pool() {
    let (_, events) = run("fixtures/table5_corpus.jsonl", true);
    assert_eq!(
        events.len(),
        1,
        "{:?}",
        events.iter().map(|e| e.key.id()).collect::<Vec<_>>()
    );
    let pool = &events[0].candidates;
    let mut rows: Vec<(String, String, String)> = pool
        .iter()
        .map(|c| {
            (
                c.published.to_string(),
                c.value.amount.normalize().to_string(),
                c.date.format("%Y").to_string(),
            )
        })
        .collect();
    rows.sort();
    let expected = [
        ("2003-11-25", "7300000000", "2003"),
        ("2004-10-26", "7700000000", "2004"),
        ("2004-10-26", "7700000000", "2004"),
        ("2005-06-30", "10300000000", "2005"),
        ("2005-12-23", "1300000000", "2004"),
        ("2005-12-23", "7038000000", "2004"),
        ("2007-03-01", "10300000000", "2004"),
        ("2007-03-21", "20000000000", "2007"),
    ];
    let expected: Vec<(String, String, String)> = expected
        .iter()
        .map(|(a, b, c)| (a.to_string(), b.to_string(), c.to_string()))
        .collect();
    assert_eq!(rows, expected);
    let earliest = select_earliest(pool).unwrap();
    assert_eq!(
        (
            earliest.published.to_string(),
            earliest.value.amount.normalize().to_string()
        ),
        ("2003-11-25".into(), "7300000000".into())
    );
    let latest = select_latest(pool).unwrap();
    assert_eq!(
        (
            latest.published.to_string(),
            latest.value.amount.normalize().to_string()
        ),
        ("2007-03-21".into(), "20000000000".into())
    );
}
