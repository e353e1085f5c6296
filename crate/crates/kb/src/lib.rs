//! Knowledge-base curation: a journaled decision store and the HTTP API
//! the curator frontend consumes.

pub mod http;
pub mod service;
pub mod store;

use std::path::PathBuf;

use econ_events::entities::{EntityRepository, RepositoryError};
use econ_events::events::{regroup, CandidateQuintuple};
use econ_events::jsonl::{self, JsonlError};
use econ_events::learning::{ForestModel, LearningError};
use econ_events::ontology::{Ontology, OntologyError};

use crate::service::{initial_records, KbService};
use crate::store::{Store, StoreError};

/// Files a served data directory holds. Only the model is optional.
#[derive(Debug, Clone)]
pub struct DataDir {
    pub root: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{0} is missing")]
    Missing(PathBuf),
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error(transparent)]
    Entities(#[from] RepositoryError),
    #[error(transparent)]
    Candidates(#[from] JsonlError),
    #[error(transparent)]
    Model(#[from] LearningError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl DataDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DataDir { root: root.into() }
    }

    pub fn ontology(&self) -> PathBuf {
        self.root.join("ontology.jsonl")
    }
    pub fn nouns(&self) -> PathBuf {
        self.root.join("nouns.tsv")
    }
    pub fn entities(&self) -> PathBuf {
        self.root.join("entities.jsonl")
    }
    pub fn candidates(&self) -> PathBuf {
        self.root.join("candidates.jsonl")
    }
    pub fn corpus(&self) -> PathBuf {
        self.root.join("corpus.jsonl")
    }
    pub fn model(&self) -> PathBuf {
        self.root.join("model.json")
    }
    pub fn store(&self) -> PathBuf {
        self.root.join("kb")
    }

    fn require(path: PathBuf) -> Result<PathBuf, LoadError> {
        if path.exists() {
            Ok(path)
        } else {
            Err(LoadError::Missing(path))
        }
    }

    /// Loads everything and opens (or creates) the store. The corpus is only
    /// read when provenance is requested.
    pub fn open(&self, gamma: f64) -> Result<KbService, LoadError> {
        let nouns = self.nouns();
        let ontology = Ontology::load(
            Self::require(self.ontology())?,
            nouns.exists().then_some(nouns.as_path()),
        )?;
        let entities = EntityRepository::load(Self::require(self.entities())?)?;
        let candidates: Vec<CandidateQuintuple> = jsonl::read_all(Self::require(self.candidates())?)?;
        let model_path = self.model();
        let model = if model_path.exists() {
            Some(ForestModel::load(&model_path)?)
        } else {
            None
        };
        let events = regroup(candidates);
        let records = initial_records(&events, model.as_ref(), gamma)?;
        let store = Store::open(self.store(), records)?;
        log::info!(
            "serving {} events from {} ({})",
            events.len(),
            self.root.display(),
            if model.is_some() {
                "supervised scores"
            } else {
                "baseline picks only"
            }
        );
        Ok(KbService::new(store, entities, ontology, self.corpus()))
    }
}
