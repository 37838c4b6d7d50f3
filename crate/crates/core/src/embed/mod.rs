//! Node embeddings from biased random walks.
//!
//! Walks are second-order: the step out of `v` depends on the node `t` the
//! walk arrived from. A successor `x` of `v` gets unnormalized mass
//! `alpha(t, x) * W[v][x]`, where `alpha` is `1/p` for returning to `t`, `1`
//! for nodes adjacent to `t` and `1/q` for everything further away. The
//! walks feed a skip-gram model trained with negative sampling.

mod alias;
mod skipgram;
mod walk;

use thiserror::Error;

pub use alias::AliasTable;
pub use skipgram::{
    negative_sampling_loss, skipgram_pairs, train_embeddings, EmbedConfig, EmbeddingMatrix,
    EmbeddingRun, SgnsGradient,
};
pub use walk::{
    alpha, generate_walk, generate_walks, transition_distribution, TransitionTables, WalkCorpus,
    WalkParams,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmbedError {
    #[error("shortest-path distance must be 0, 1 or 2, got {0}")]
    InvalidDistance(u32),
    #[error("invalid walk parameters: {0}")]
    InvalidParams(&'static str),
    #[error("node {0} has no successors")]
    DeadEnd(usize),
    #[error("no edge {0} -> {1}")]
    MissingEdge(usize, usize),
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("walk corpus is empty")]
    EmptyWalkCorpus,
    #[error("embedding shape mismatch: {0}")]
    Shape(&'static str),
}
