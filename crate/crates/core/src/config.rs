//! Run configuration shared by every stage.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::annotate::dates::NumericDateOrder;
use crate::annotate::AnnotatorConfig;
use crate::learning::Hyperparams;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("gamma must lie in [0, 1], got {0}")]
    Gamma(f64),
    #[error("{0}")]
    Forest(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub ontology: Option<PathBuf>,
    pub nouns: Option<PathBuf>,
    pub entities: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub noun_predicates: bool,
    pub enforce_roles: bool,
    pub require_description: bool,
    pub gamma: f64,
    pub seed: u64,
    pub date_order: NumericDateOrder,
    pub forest: Hyperparams,
    pub paths: Paths,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            noun_predicates: false,
            enforce_roles: false,
            require_description: false,
            gamma: 0.3,
            seed: 42,
            date_order: NumericDateOrder::MonthFirst,
            forest: Hyperparams::default(),
            paths: Paths::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(ConfigError::Gamma(self.gamma));
        }
        let f = &self.forest;
        if f.n_trees == 0 || f.min_leaf == 0 || f.features_per_split == 0 {
            return Err(ConfigError::Forest(
                "n_trees, min_leaf and features_per_split must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn annotator(&self) -> AnnotatorConfig {
        AnnotatorConfig {
            noun_predicates: self.noun_predicates,
            enforce_roles: self.enforce_roles,
            require_description: self.require_description,
            date_order: self.date_order,
        }
    }
}
