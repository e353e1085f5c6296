use std::path::PathBuf;

use econ_events::annotate::{Annotator, AnnotatorConfig};
use econ_events::corpus::{corpus_predicate_frequencies, load_corpus};
use econ_events::entities::{merge_records, EntityRepository};
use econ_events::evaluation::{load_truth, MatchMode};
use econ_events::learning::Hyperparams;
use econ_events::ontology::{build_from_files, OntologySources};
use econ_events::pipeline::{extract_events, loo_cv, rethreshold, LooSettings};
use econ_events::selection::Method;

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

#[test]
fn supervised_beats_earliest_under_cross_validation() {
    let (seeds, lex, overlay, nouns) = (
        data("ontology/seeds.tsv"),
        data("ontology/lexical.txt"),
        data("ontology/overlay.txt"),
        data("ontology/nouns.tsv"),
    );
    let ontology = build_from_files(&OntologySources {
        seeds: &seeds,
        lexical_resource: &lex,
        overlay: Some(&overlay),
        nouns: Some(&nouns),
    })
    .unwrap()
    .ontology;
    let repository = merge_records(&EntityRepository::load_source(data("synthetic/entities.jsonl")).unwrap());
    let docs = load_corpus(data("synthetic/corpus.jsonl")).unwrap().documents;
    let stats = corpus_predicate_frequencies(&docs, &ontology);
    let annotator = Annotator {
        ontology: &ontology,
        repository: &repository,
        stats: &stats,
        config: AnnotatorConfig {
            noun_predicates: true,
            enforce_roles: true,
            require_description: true,
            ..AnnotatorConfig::default()
        },
    };
    let annotated = annotator.annotate_corpus(&docs).sentences;
    let events = extract_events(&annotated, &ontology).unwrap();
    let truths = load_truth(data("synthetic/truth.jsonl")).unwrap();
    let report = loo_cv(
        &events,
        &truths,
        &ontology,
        LooSettings {
            mode: MatchMode::Relaxed,
            gamma: 0.3,
            seed: 42,
            forest: Hyperparams::default(),
        },
    )
    .unwrap();
    let mut last_precision = 0.0;
    for step in 0..10 {
        let (r, returned) = rethreshold(&report, &truths, &ontology, step as f64 / 10.0).unwrap();
        if returned > 0 {
            assert!(r.precision >= last_precision);
            last_precision = r.precision;
        }
    }
    let sup = report.aggregate[&Method::Supervised].f1;
    let early = report.aggregate[&Method::Earliest].f1;
    assert!(sup > early, "supervised {sup} vs earliest {early}");
}
