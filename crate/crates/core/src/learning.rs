//! Random-forest regression over candidate features.
//!
//! Trees split on the largest drop in impurity `2 * variance`, which for
//! 0/1 labels is the Gini index. Leaves hold the mean label, so every
//! prediction lies in [0, 1].

use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::evaluation::{candidate_matches, GroundTruthEvent, MatchMode};
use crate::events::EventCandidates;
use crate::ontology::{Ontology, OntologyError};
use crate::selection::{extract_features, FEATURE_SCHEMA};

#[derive(Debug, thiserror::Error)]
pub enum LearningError {
    #[error("no training instances")]
    NoInstances,
    #[error("feature vector has {got} columns, model expects {expected}")]
    SchemaMismatch { expected: usize, got: usize },
    #[error("model schema differs from the feature schema of this build")]
    SchemaNames,
    #[error("supervised selection needs a model")]
    MissingModel,
    #[error("invalid hyperparameters: {0}")]
    Hyperparams(String),
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: not a model file: {source}")]
    Format { path: String, source: serde_json::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub features_per_split: usize,
    pub bootstrap: bool,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            n_trees: 100,
            max_depth: 12,
            min_leaf: 2,
            features_per_split: 5,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// share of the tree's sample reaching this node times its impurity drop
        weighted_decrease: f64,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    /// root at index 0
    pub nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub feature_schema: Vec<String>,
    pub hyperparams: Hyperparams,
    pub seed: u64,
    pub trees: Vec<Tree>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub features: Vec<(String, f64)>,
}

impl ImportanceReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.features.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingInstance {
    pub features: Vec<f64>,
    pub label: f64,
    pub event_id: String,
    pub company_tag: Option<String>,
}

/// Running sums for impurity of a label multiset.
#[derive(Clone, Copy, Default)]
struct Moments {
    n: f64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn add(&mut self, y: f64) {
        self.n += 1.0;
        self.sum += y;
        self.sum_sq += y * y;
    }

    fn sub(&mut self, y: f64) {
        self.n -= 1.0;
        self.sum -= y;
        self.sum_sq -= y * y;
    }

    /// n * impurity
    fn weighted_impurity(&self) -> f64 {
        if self.n == 0.0 {
            return 0.0;
        }
        let mean = self.sum / self.n;
        (2.0 * (self.sum_sq - self.n * mean * mean)).max(0.0)
    }
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    hp: Hyperparams,
    n_features: usize,
    total: f64,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn grow(&mut self, rows: &mut [usize], depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let mut parent = Moments::default();
        for &r in rows.iter() {
            parent.add(self.y[r]);
        }
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            value: parent.sum / parent.n,
        });
        let parent_impurity = parent.weighted_impurity();
        if depth >= self.hp.max_depth || rows.len() < 2 * self.hp.min_leaf || parent_impurity <= 1e-12 {
            return id;
        }

        let mut features: Vec<usize> = if self.hp.features_per_split >= self.n_features {
            (0..self.n_features).collect()
        } else {
            sample(rng, self.n_features, self.hp.features_per_split).into_vec()
        };
        features.sort_unstable();

        // (gain, feature, threshold); strict improvement keeps the lowest index
        let mut best: Option<(f64, usize, f64)> = None;
        for &f in &features {
            rows.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            let mut left = Moments::default();
            let mut right = parent;
            for k in 0..rows.len() - 1 {
                let y = self.y[rows[k]];
                left.add(y);
                right.sub(y);
                let (lo, hi) = (self.x[rows[k]][f], self.x[rows[k + 1]][f]);
                if lo == hi || k + 1 < self.hp.min_leaf || rows.len() - k - 1 < self.hp.min_leaf {
                    continue;
                }
                let gain = parent_impurity - left.weighted_impurity() - right.weighted_impurity();
                if gain > 1e-12 && best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, f, lo + (hi - lo) / 2.0));
                }
            }
        }
        let Some((gain, feature, threshold)) = best else {
            return id;
        };
        let split = partition(rows, |r| self.x[r][feature] <= threshold);
        let (left_rows, right_rows) = rows.split_at_mut(split);
        let left = self.grow(left_rows, depth + 1, rng);
        let right = self.grow(right_rows, depth + 1, rng);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
            weighted_decrease: gain / self.total,
        };
        id
    }
}

fn partition(rows: &mut [usize], pred: impl Fn(usize) -> bool) -> usize {
    rows.sort_by_key(|&r| (!pred(r), r));
    rows.iter().take_while(|&&r| pred(r)).count()
}

fn tree_rng(seed: u64, tree: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree as u64);
    rng
}

/// Trains `hp.n_trees` trees in parallel; the result depends only on the
/// data, `hp` and `seed`.
pub fn train_forest(
    x: &[Vec<f64>],
    y: &[f64],
    schema: &[&str],
    hp: Hyperparams,
    seed: u64,
) -> Result<ForestModel, LearningError> {
    if x.is_empty() || x.len() != y.len() {
        return Err(LearningError::NoInstances);
    }
    if hp.n_trees == 0 || hp.min_leaf == 0 || hp.features_per_split == 0 {
        return Err(LearningError::Hyperparams(format!("{hp:?}")));
    }
    let n_features = schema.len();
    if let Some(row) = x.iter().find(|r| r.len() != n_features) {
        return Err(LearningError::SchemaMismatch {
            expected: n_features,
            got: row.len(),
        });
    }
    let positives = y.iter().filter(|&&v| v >= 0.5).count();
    if positives == 0 || positives == y.len() {
        log::warn!("training set has a single label ({positives} positives of {})", y.len());
    }
    let trees = (0..hp.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree_rng(seed, t);
            let mut rows: Vec<usize> = if hp.bootstrap {
                (0..x.len()).map(|_| rng.gen_range(0..x.len())).collect()
            } else {
                (0..x.len()).collect()
            };
            let mut builder = Builder {
                x,
                y,
                hp,
                n_features,
                total: rows.len() as f64,
                nodes: Vec::new(),
            };
            builder.grow(&mut rows, 0, &mut rng);
            Tree { nodes: builder.nodes }
        })
        .collect();
    Ok(ForestModel {
        feature_schema: schema.iter().map(|s| s.to_string()).collect(),
        hyperparams: hp,
        seed,
        trees,
    })
}

impl ForestModel {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, LearningError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| LearningError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| LearningError::Format {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), LearningError> {
        let path = path.as_ref();
        let mut text = serde_json::to_string(self).expect("model serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(|source| LearningError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn predict(&self, features: &[f64]) -> Result<f64, LearningError> {
        if features.len() != self.feature_schema.len() {
            return Err(LearningError::SchemaMismatch {
                expected: self.feature_schema.len(),
                got: features.len(),
            });
        }
        let sum: f64 = self.trees.iter().map(|t| t.predict(features)).sum();
        Ok(sum / self.trees.len() as f64)
    }

    /// Errors unless the model was trained on this build's candidate features.
    pub fn check_candidate_schema(&self) -> Result<(), LearningError> {
        if self
            .feature_schema
            .iter()
            .map(String::as_str)
            .eq(FEATURE_SCHEMA.iter().copied())
        {
            Ok(())
        } else {
            Err(LearningError::SchemaNames)
        }
    }

    /// Mean impurity decrease per column, normalized to sum to one. A forest
    /// without splits reports zeros.
    pub fn gini_importance(&self) -> ImportanceReport {
        let mut totals = vec![0.0; self.feature_schema.len()];
        for tree in &self.trees {
            for node in &tree.nodes {
                if let Node::Split {
                    feature,
                    weighted_decrease,
                    ..
                } = node
                {
                    totals[*feature] += weighted_decrease;
                }
            }
        }
        let sum: f64 = totals.iter().sum();
        if sum > 0.0 {
            for t in &mut totals {
                *t /= sum;
            }
        }
        ImportanceReport {
            features: self.feature_schema.iter().cloned().zip(totals).collect(),
        }
    }
}

/// Candidate features with 0/1 labels: 1 when the candidate matches a
/// ground-truth record of its event under relaxed matching.
pub fn label_instances(
    events: &[EventCandidates],
    truths: &[GroundTruthEvent],
    ontology: &Ontology,
) -> Result<Vec<TrainingInstance>, LearningError> {
    let mut out = Vec::new();
    for event in events {
        for c in &event.candidates {
            let mut label = 0.0;
            for t in truths {
                if candidate_matches(c, t, MatchMode::Relaxed, ontology)? {
                    label = 1.0;
                    break;
                }
            }
            out.push(TrainingInstance {
                features: extract_features(c, &event.candidates).encode(),
                label,
                event_id: event.key.id(),
                company_tag: None,
            });
        }
    }
    Ok(out)
}

/// Trains on labeled instances with the candidate feature schema.
pub fn train_on_instances(
    instances: &[TrainingInstance],
    hp: Hyperparams,
    seed: u64,
) -> Result<ForestModel, LearningError> {
    let x: Vec<Vec<f64>> = instances.iter().map(|i| i.features.clone()).collect();
    let y: Vec<f64> = instances.iter().map(|i| i.label).collect();
    train_forest(&x, &y, &FEATURE_SCHEMA, hp, seed)
}
