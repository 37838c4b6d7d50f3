//! Convolutional document classifier over embedding rows.
//!
//! A document is a `max_len x dims` matrix whose rows are node embeddings in
//! token order, zero-padded at the end. Filters of several widths slide over
//! the rows (`c_i = tanh(w . rows[i..i+width] + b)`), each feature map is
//! max-pooled over time, and the pooled vector goes through dropout, a tanh
//! hidden layer and a softmax head.

mod adam;
mod model;
mod train;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use thiserror::Error;

use crate::embed::EmbeddingMatrix;
use crate::textgraph::{NodeId, TokenSequence, Vocabulary};

pub use adam::Adam;
pub use model::{CnnModel, CnnParams};
pub use train::{accuracy, train, EpochStats, TrainConfig, TrainOutcome};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConvNetError {
    #[error("filter width {width} exceeds sequence length {len}")]
    FilterTooWide { width: usize, len: usize },
    #[error("empty feature map")]
    EmptyFeatureMap,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(&'static str),
    #[error("label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(&'static str),
    #[error("unknown mode {0:?}")]
    UnknownMode(String),
}

/// How the embedding rows are treated during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EmbeddingMode {
    /// Randomly initialized rows, trained with the network.
    Rand,
    /// Graph embeddings, frozen.
    Static,
    /// Graph embeddings, fine-tuned.
    NonStatic,
    /// Two copies of the graph embeddings, one frozen and one fine-tuned.
    Multichannel,
}

impl EmbeddingMode {
    pub const ALL: [EmbeddingMode; 4] =
        [EmbeddingMode::Rand, EmbeddingMode::Static, EmbeddingMode::NonStatic, EmbeddingMode::Multichannel];

    /// Trainability of each embedding channel.
    pub fn channels(self) -> &'static [bool] {
        match self {
            EmbeddingMode::Rand | EmbeddingMode::NonStatic => &[true],
            EmbeddingMode::Static => &[false],
            EmbeddingMode::Multichannel => &[false, true],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EmbeddingMode::Rand => "rand",
            EmbeddingMode::Static => "static",
            EmbeddingMode::NonStatic => "non-static",
            EmbeddingMode::Multichannel => "multichannel",
        }
    }
}

impl fmt::Display for EmbeddingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EmbeddingMode {
    type Err = ConvNetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EmbeddingMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| ConvNetError::UnknownMode(String::from(s)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnnHyperparams {
    pub max_len: usize,
    pub dims: usize,
    pub filter_widths: Vec<usize>,
    /// Filters per width.
    pub n_filters: usize,
    /// Drop probability on the pooled vector while training.
    pub dropout: f64,
    pub hidden_dim: usize,
    pub n_classes: usize,
    pub mode: EmbeddingMode,
}

impl Default for CnnHyperparams {
    fn default() -> Self {
        CnnHyperparams {
            max_len: 64,
            dims: 20,
            filter_widths: alloc::vec![3, 4],
            n_filters: 150,
            dropout: 0.25,
            hidden_dim: 150,
            n_classes: 2,
            mode: EmbeddingMode::Static,
        }
    }
}

impl CnnHyperparams {
    pub fn validate(&self) -> Result<(), ConvNetError> {
        use ConvNetError::InvalidHyperparams as Bad;
        if self.max_len == 0 {
            return Err(Bad("max_len must be at least 1"));
        }
        if self.dims == 0 {
            return Err(Bad("dims must be at least 1"));
        }
        if self.filter_widths.is_empty() || self.filter_widths.contains(&0) {
            return Err(Bad("filter widths must be non-empty and positive"));
        }
        if let Some(&width) = self.filter_widths.iter().find(|&&w| w > self.max_len) {
            return Err(ConvNetError::FilterTooWide { width, len: self.max_len });
        }
        if self.n_filters == 0 {
            return Err(Bad("need at least one filter per width"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Bad("dropout must be in [0, 1)"));
        }
        if self.hidden_dim == 0 {
            return Err(Bad("hidden_dim must be at least 1"));
        }
        if self.n_classes < 2 {
            return Err(Bad("need at least two classes"));
        }
        Ok(())
    }

    pub fn pooled_len(&self) -> usize {
        self.filter_widths.len() * self.n_filters
    }

    pub fn max_width(&self) -> usize {
        self.filter_widths.iter().copied().max().unwrap_or(0)
    }
}

/// A document as padded node ids: `None` marks padding and
/// out-of-vocabulary tokens, both of which read as a zero row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedDoc {
    pub ids: Vec<Option<NodeId>>,
    /// Tokens kept before padding.
    pub true_length: usize,
}

impl EncodedDoc {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Truncate or zero-pad `tokens` to `max_len` ids.
pub fn encode_document(tokens: &TokenSequence, vocab: &Vocabulary, max_len: usize) -> EncodedDoc {
    let mut ids: Vec<Option<NodeId>> = tokens.tokens.iter().take(max_len).map(|t| vocab.id(t)).collect();
    let true_length = ids.len();
    ids.resize(max_len, None);
    EncodedDoc { ids, true_length }
}

/// Dense `max_len x dims` document matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DocMatrix {
    pub max_len: usize,
    pub dims: usize,
    pub rows: Vec<f64>,
    pub true_length: usize,
}

impl DocMatrix {
    pub fn from_encoded(doc: &EncodedDoc, emb: &EmbeddingMatrix) -> Self {
        let dims = emb.dims();
        let mut rows = alloc::vec![0.0; doc.len() * dims];
        for (i, id) in doc.ids.iter().enumerate() {
            if let Some(&id) = id.as_ref().filter(|&&id| id < emb.n_nodes()) {
                rows[i * dims..(i + 1) * dims].copy_from_slice(emb.row(id));
            }
        }
        DocMatrix { max_len: doc.len(), dims, rows, true_length: doc.true_length }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dims..(i + 1) * self.dims]
    }
}

/// Rows of the token embeddings in order, truncated to `max_len` and
/// zero-padded; unknown tokens give zero rows.
pub fn embed_document(
    tokens: &TokenSequence,
    vocab: &Vocabulary,
    emb: &EmbeddingMatrix,
    max_len: usize,
) -> DocMatrix {
    DocMatrix::from_encoded(&encode_document(tokens, vocab, max_len), emb)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Tanh,
    Identity,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => libm::tanh(x),
            Activation::Identity => x,
        }
    }
}

/// Feature map of one filter: `f(w . rows[i..i+width] + b)` for every
/// start position `i`. `filter` holds `width * dims` weights, row by row.
pub fn convolve(
    matrix: &DocMatrix,
    filter: &[f64],
    bias: f64,
    width: usize,
    activation: Activation,
) -> Result<Vec<f64>, ConvNetError> {
    if width == 0 || width > matrix.max_len {
        return Err(ConvNetError::FilterTooWide { width, len: matrix.max_len });
    }
    if filter.len() != width * matrix.dims {
        return Err(ConvNetError::DimensionMismatch("filter length is not width * dims"));
    }
    let span = width * matrix.dims;
    Ok((0..=matrix.max_len - width)
        .map(|i| {
            let window = &matrix.rows[i * matrix.dims..i * matrix.dims + span];
            activation.apply(crate::math::dot(filter, window) + bias)
        })
        .collect())
}

/// Maximum of a feature map and the index of its first occurrence.
pub fn max_over_time(feature_map: &[f64]) -> Result<(f64, usize), ConvNetError> {
    let (&first, rest) = feature_map.split_first().ok_or(ConvNetError::EmptyFeatureMap)?;
    let mut best = (first, 0);
    for (i, &v) in rest.iter().enumerate() {
        if v > best.0 {
            best = (v, i + 1);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textgraph::tokenize;
    use alloc::vec;

    fn emb4() -> (Vocabulary, EmbeddingMatrix) {
        let vocab = Vocabulary::from_sequences([&tokenize("a b c d e f g", "v")]);
        let data: Vec<f64> = (0..7 * 4).map(|i| i as f64 + 1.0).collect();
        (vocab, EmbeddingMatrix::from_center(7, 4, data).unwrap())
    }

    #[test]
    fn padding_rows_are_zero() {
        let (vocab, emb) = emb4();
        let m = embed_document(&tokenize("a b c", "x"), &vocab, &emb, 5);
        assert_eq!((m.max_len, m.dims, m.true_length), (5, 4, 3));
        assert_eq!(m.row(0), emb.row(0));
        assert_eq!(m.row(2), emb.row(2));
        assert!(m.rows[3 * 4..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn oov_row_is_zero() {
        let (vocab, emb) = emb4();
        let m = embed_document(&tokenize("a zzz c", "x"), &vocab, &emb, 3);
        assert!(m.row(1).iter().all(|&v| v == 0.0));
        assert_eq!(m.row(2), emb.row(2));
        assert_eq!(m.true_length, 3);
    }

    #[test]
    fn long_documents_truncate() {
        let (vocab, emb) = emb4();
        let m = embed_document(&tokenize("a b c d e f g", "x"), &vocab, &emb, 5);
        for i in 0..5 {
            assert_eq!(m.row(i), emb.row(i));
        }
        assert_eq!(m.true_length, 5);
    }

    #[test]
    fn convolve_cases() {
        let m = DocMatrix { max_len: 2, dims: 2, rows: vec![1.0, 2.0, 3.0, 4.0], true_length: 2 };
        let c = convolve(&m, &[1.0, 0.0, 0.0, 1.0], 0.0, 2, Activation::Identity).unwrap();
        assert_eq!(c, vec![5.0]);

        let z = DocMatrix { max_len: 10, dims: 3, rows: vec![0.7; 30], true_length: 10 };
        let c = convolve(&z, &[0.0; 9], 0.0, 3, Activation::Tanh).unwrap();
        assert_eq!(c.len(), 8);
        assert!(c.iter().all(|&v| v == 0.0));

        assert_eq!(
            convolve(&m, &[0.0; 6], 0.0, 3, Activation::Tanh),
            Err(ConvNetError::FilterTooWide { width: 3, len: 2 })
        );
    }

    #[test]
    fn pooling_cases() {
        assert_eq!(max_over_time(&[0.2, -0.5, 0.9]).unwrap(), (0.9, 2));
        assert_eq!(max_over_time(&[0.3, 0.3]).unwrap(), (0.3, 0));
        assert_eq!(max_over_time(&[-1.2]).unwrap(), (-1.2, 0));
        assert_eq!(max_over_time(&[]), Err(ConvNetError::EmptyFeatureMap));
    }

    #[test]
    fn mode_names_round_trip() {
        for m in EmbeddingMode::ALL {
            assert_eq!(m.as_str().parse::<EmbeddingMode>().unwrap(), m);
        }
        assert!("dynamic".parse::<EmbeddingMode>().is_err());
    }

    #[test]
    fn hyperparam_validation() {
        assert!(CnnHyperparams::default().validate().is_ok());
        let bad = [
            CnnHyperparams { filter_widths: vec![5], max_len: 4, ..Default::default() },
            CnnHyperparams { n_filters: 0, ..Default::default() },
            CnnHyperparams { n_classes: 1, ..Default::default() },
            CnnHyperparams { dropout: 1.0, ..Default::default() },
        ];
        for h in bad {
            assert!(h.validate().is_err());
        }
    }
}
