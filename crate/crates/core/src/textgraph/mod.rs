//! Tokenization and word co-occurrence graphs.
//!
//! A sentence becomes a graph whose nodes are its distinct words; two words
//! are joined when they occur fewer than `window` positions apart. Sentence
//! graphs over a shared [`Vocabulary`] are merged into one corpus graph by
//! summing coincident edge weights.

mod graph;
mod tokenize;

use alloc::string::String;
use thiserror::Error;

pub use graph::{build_corpus_graph, build_sentence_graph, merge_graphs, GraphBuilder, WordGraph};
pub use tokenize::{split_sentences, tokenize, TokenSequence, Vocabulary};

/// Dense node index into a [`Vocabulary`].
pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TextGraphError {
    #[error("window must be at least 2, got {0}")]
    InvalidWindow(usize),
    #[error("token {0:?} is not in the vocabulary")]
    UnknownToken(String),
    #[error("cannot merge directed and undirected graphs")]
    MixedGraphKinds,
    #[error("graphs disagree on node count ({0} vs {1})")]
    NodeCountMismatch(usize, usize),
    #[error("corpus has no tokens")]
    EmptyCorpus,
    #[error("duplicate token {0:?} in vocabulary")]
    DuplicateToken(String),
    #[error("invalid edge {src}->{dst} with weight {weight}")]
    InvalidEdge { src: NodeId, dst: NodeId, weight: f64 },
}

/// How sentence graphs are built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphConfig {
    /// Maximum span of a co-occurrence: positions `i < j` are linked when
    /// `j - i < window`.
    pub window: usize,
    /// Edges follow text order when set.
    pub directed: bool,
    /// Count repeated co-occurrences; otherwise every edge has weight 1.
    pub weighted: bool,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig { window: 3, directed: true, weighted: true }
    }
}

impl GraphConfig {
    pub fn validate(&self) -> Result<(), TextGraphError> {
        if self.window < 2 {
            return Err(TextGraphError::InvalidWindow(self.window));
        }
        Ok(())
    }
}
