//! Text-as-graph sentiment classification primitives.
//!
//! The crate turns token sequences into word co-occurrence graphs
//! ([`textgraph`]), learns node embeddings from second-order biased random
//! walks with a negative-sampling skip-gram model ([`embed`]), classifies
//! documents with a small convolutional network over the embedding rows
//! ([`convnet`]) and scores predictions ([`eval`]).
//!
//! Everything here is `no_std` + `alloc`. File formats, dataset loading and
//! the command line live in the companion `sentigraph` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod convnet;
pub mod embed;
pub mod eval;
pub mod seed;
pub mod textgraph;

mod math;

pub use embed::{EmbedConfig, EmbedError, EmbeddingMatrix, WalkCorpus, WalkParams};

pub use textgraph::{GraphConfig, NodeId, TextGraphError, TokenSequence, Vocabulary, WordGraph};
pub use convnet::{CnnHyperparams, CnnModel, ConvNetError, DocMatrix, EmbeddingMode, EncodedDoc};
pub use eval::{ConfusionMatrix, EvalError, EvalReport};
