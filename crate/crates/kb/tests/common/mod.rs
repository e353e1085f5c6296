use std::fs;
use std::path::{Path, PathBuf};

use econ_events::annotate::{Annotator, AnnotatorConfig};
use econ_events::corpus::{corpus_predicate_frequencies, load_corpus};
use econ_events::entities::{merge_records, EntityRepository};
use econ_events::events::CandidateQuintuple;
use econ_events::jsonl;
use econ_events::ontology::{build_from_files, OntologySources};
use econ_events::pipeline::extract_events;
use econ_kb::DataDir;

pub fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

/// A served data directory over the Table I and Oracle/PeopleSoft corpora,
/// without a model.
pub fn fixture_dir(root: &Path) -> DataDir {
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
    let repository = merge_records(&EntityRepository::load_source(data("entities/source.jsonl")).unwrap());
    let dir = DataDir::new(root);
    let mut corpus = fs::read_to_string(data("fixtures/table1_corpus.jsonl")).unwrap();
    corpus.push_str(&fs::read_to_string(data("fixtures/table5_corpus.jsonl")).unwrap());
    fs::write(dir.corpus(), corpus).unwrap();
    let docs = load_corpus(dir.corpus()).unwrap().documents;
    let stats = corpus_predicate_frequencies(&docs, &ontology);
    let annotator = Annotator {
        ontology: &ontology,
        repository: &repository,
        stats: &stats,
        config: AnnotatorConfig {
            noun_predicates: true,
            ..AnnotatorConfig::default()
        },
    };
    let annotated = annotator.annotate_corpus(&docs).sentences;
    let events = extract_events(&annotated, &ontology).unwrap();
    let candidates: Vec<&CandidateQuintuple> = events.iter().flat_map(|e| &e.candidates).collect();
    jsonl::write_all(dir.candidates(), candidates).unwrap();
    ontology.save(dir.ontology()).unwrap();
    fs::copy(&nouns, dir.nouns()).unwrap();
    repository.save(dir.entities()).unwrap();
    dir
}

pub const ORACLE: &str = "oracle~buy~peoplesoft";
pub const GOOGLE: &str = "google~buy~youtube";
