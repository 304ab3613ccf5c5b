//! Causal link prediction over weighted causal event graphs.
//!
//! The pipeline turns annotated causal event graphs into causal networks
//! (weighted DAGs), removes backdoor paths between train and test links,
//! compiles the networks into a causal knowledge graph, trains knowledge
//! graph embeddings with and without causal weights, and measures how much
//! backdoor paths inflate filtered link-prediction metrics.
//!
//! Modules follow the pipeline stages:
//!
//! - [`ingest`] — corpus parsing, label normalization, node filtering
//! - [`graph`] — DAG repair, weight mapping, backdoor path machinery
//! - [`split`] — corpus split and Markov-based per-graph train/test split
//! - [`kg`] — quad compilation with reified causal relations (C/CT/CTP)
//! - [`kge`] — TransE/DistMult/HolE/ComplEx training, weighted modulation
//! - [`eval`] — filtered ranking, MRR, Hits@K
//! - [`synth`] — synthetic confounded corpus generation
//! - [`pipeline`] — end-to-end orchestration and report tables

pub mod eval;
pub mod graph;
pub mod ingest;
pub mod kg;
pub mod kge;
pub mod pipeline;
pub mod split;
pub mod synth;
pub mod util;

pub use eval::{EvalTask, RankReport, TaskKind};
pub use graph::{BackdoorSet, BackdoorVariant, CausalNetwork};
pub use ingest::{CausalEventGraph, EventNode, Lexicon, SceneObject, ScoredEdge};
pub use kg::{CausalKg, Quad, SubgraphTag};
pub use kge::{EmbeddingModel, Scorer, TrainConfig};
pub use split::{Regime, SplitManifest};
