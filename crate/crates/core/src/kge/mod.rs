//! Knowledge-graph embeddings: four scoring functions, two losses, optional
//! Lp regularization, and causal-weight score modulation.
//!
//! Models are plain dense vectors over a closed entity/relation vocabulary.
//! Training is single-threaded and fully deterministic for a fixed seed.

mod io;
mod scorers;
mod train;

pub use io::{load_model, save_model};
pub use scorers::circular_correlation;
pub use train::{
    loss, loss_grad, modulate, modulate_grad, negative_sample, softplus, train, LossKind,
    LpRegularizer,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KgeError {
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("entity pool too small for corruption (need at least 2 entities)")]
    PoolTooSmall,
    #[error("training produced a non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("no training quads")]
    EmptyTrainingSet,
    #[error("model file: {0}")]
    ModelFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Scoring function family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scorer {
    TransE,
    DistMult,
    HolE,
    ComplEx,
}

impl Scorer {
    pub const ALL: [Scorer; 4] = [Scorer::TransE, Scorer::DistMult, Scorer::HolE, Scorer::ComplEx];

    pub fn as_str(self) -> &'static str {
        match self {
            Scorer::TransE => "TransE",
            Scorer::DistMult => "DistMult",
            Scorer::HolE => "HolE",
            Scorer::ComplEx => "ComplEx",
        }
    }

    /// Stored reals per embedding dimension: ComplEx keeps interleaved
    /// (real, imaginary) pairs and needs 2k values for dimension k.
    pub fn storage_per_dim(self) -> usize {
        match self {
            Scorer::ComplEx => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for Scorer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Embedding dimension.
    pub k: usize,
    /// Negatives sampled per positive.
    pub eta: usize,
    pub epochs: usize,
    pub batches_count: usize,
    pub loss: LossKind,
    #[serde(default)]
    pub regularizer: Option<LpRegularizer>,
    pub learning_rate: f64,
    pub seed: u64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), KgeError> {
        if self.k == 0 {
            return Err(KgeError::InvalidConfig("k must be positive".into()));
        }
        if self.eta == 0 {
            return Err(KgeError::InvalidConfig("eta must be at least 1".into()));
        }
        if self.epochs == 0 {
            return Err(KgeError::InvalidConfig("epochs must be at least 1".into()));
        }
        if self.batches_count == 0 {
            return Err(KgeError::InvalidConfig("batches_count must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(KgeError::InvalidConfig("learning_rate must be positive".into()));
        }
        if let Some(reg) = &self.regularizer {
            if reg.lambda < 0.0 {
                return Err(KgeError::InvalidConfig("lambda must be non-negative".into()));
            }
            if reg.p == 0 {
                return Err(KgeError::InvalidConfig("regularizer p must be at least 1".into()));
            }
        }
        Ok(())
    }
}

/// Entity and relation vectors plus the scoring-function tag.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    scorer: Scorer,
    dim: usize,
    entity_names: Vec<String>,
    entity_index: BTreeMap<String, usize>,
    relation_names: Vec<String>,
    relation_index: BTreeMap<String, usize>,
    entity_vecs: Vec<f64>,
    relation_vecs: Vec<f64>,
    weighted: bool,
    /// Final structural-influence factor (weighted mode only).
    beta: f64,
}

impl EmbeddingModel {
    /// Assemble a model from raw vectors; names map to vectors positionally.
    pub fn from_parts(
        scorer: Scorer,
        dim: usize,
        entities: Vec<(String, Vec<f64>)>,
        relations: Vec<(String, Vec<f64>)>,
        weighted: bool,
        beta: f64,
    ) -> Result<EmbeddingModel, KgeError> {
        let storage = dim * scorer.storage_per_dim();
        let check = |pairs: &[(String, Vec<f64>)], what: &str| -> Result<(), KgeError> {
            for (name, v) in pairs {
                if v.len() != storage {
                    return Err(KgeError::InvalidConfig(format!(
                        "{what} `{name}` has {} values, expected {storage}",
                        v.len()
                    )));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(KgeError::InvalidConfig(format!("{what} `{name}` has non-finite entries")));
                }
            }
            Ok(())
        };
        check(&entities, "entity")?;
        check(&relations, "relation")?;
        if !(0.0..=1.0).contains(&beta) {
            return Err(KgeError::InvalidConfig(format!("beta {beta} outside [0,1]")));
        }

        let entity_names: Vec<String> = entities.iter().map(|(n, _)| n.clone()).collect();
        let relation_names: Vec<String> = relations.iter().map(|(n, _)| n.clone()).collect();
        let entity_index = entity_names.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
        let relation_index = relation_names.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
        Ok(EmbeddingModel {
            scorer,
            dim,
            entity_names,
            entity_index,
            relation_names,
            relation_index,
            entity_vecs: entities.into_iter().flat_map(|(_, v)| v).collect(),
            relation_vecs: relations.into_iter().flat_map(|(_, v)| v).collect(),
            weighted,
            beta,
        })
    }

    pub fn scorer(&self) -> Scorer {
        self.scorer
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weighted(&self) -> bool {
        self.weighted
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn storage(&self) -> usize {
        self.dim * self.scorer.storage_per_dim()
    }

    pub fn n_entities(&self) -> usize {
        self.entity_names.len()
    }

    pub fn n_relations(&self) -> usize {
        self.relation_names.len()
    }

    /// Entity names in id order.
    pub fn entity_names(&self) -> &[String] {
        &self.entity_names
    }

    pub fn relation_names(&self) -> &[String] {
        &self.relation_names
    }

    pub fn has_entity(&self, name: &str) -> bool {
        self.entity_index.contains_key(name)
    }

    pub fn has_relation(&self, name: &str) -> bool {
        self.relation_index.contains_key(name)
    }

    pub fn entity_id(&self, name: &str) -> Result<usize, KgeError> {
        self.entity_index
            .get(name)
            .copied()
            .ok_or_else(|| KgeError::UnknownEntity(name.to_string()))
    }

    pub fn relation_id(&self, name: &str) -> Result<usize, KgeError> {
        self.relation_index
            .get(name)
            .copied()
            .ok_or_else(|| KgeError::UnknownRelation(name.to_string()))
    }

    pub fn entity_vec(&self, id: usize) -> &[f64] {
        let s = self.storage();
        &self.entity_vecs[id * s..(id + 1) * s]
    }

    pub fn relation_vec(&self, id: usize) -> &[f64] {
        let s = self.storage();
        &self.relation_vecs[id * s..(id + 1) * s]
    }

    /// Score a triple by name.
    pub fn score(&self, head: &str, relation: &str, tail: &str) -> Result<f64, KgeError> {
        let h = self.entity_id(head)?;
        let r = self.relation_id(relation)?;
        let t = self.entity_id(tail)?;
        Ok(self.score_ids(h, r, t))
    }

    /// Score a triple by id. Deterministic, no side effects.
    pub fn score_ids(&self, head: usize, relation: usize, tail: usize) -> f64 {
        scorers::score_slices(
            self.scorer,
            self.dim,
            self.entity_vec(head),
            self.relation_vec(relation),
            self.entity_vec(tail),
        )
    }
}
