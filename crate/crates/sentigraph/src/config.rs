//! Flat pipeline configuration. A JSON file overrides the defaults; the
//! command line overrides the file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sentigraph_core::convnet::TrainConfig;
use sentigraph_core::{CnnHyperparams, EmbedConfig, EmbeddingMode, GraphConfig, WalkParams};

use crate::dataset::DataFormat;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub dataset: Option<PathBuf>,
    /// Held-out file; when absent the dataset is split.
    pub test_dataset: Option<PathBuf>,
    pub format: DataFormat,
    pub strict: bool,
    pub class_names: Vec<String>,
    pub out: PathBuf,
    pub seed: u64,
    pub split_ratio: f64,

    pub window: usize,
    pub directed: bool,
    pub weighted: bool,
    /// Build the graph per sentence rather than per document.
    pub split_sentences: bool,

    pub p: f64,
    pub q: f64,
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub dims: usize,
    pub embed_epochs: usize,
    pub embed_lr: f64,
    pub negatives: usize,
    pub context_window: usize,

    #[serde(with = "mode_name")]
    pub mode: EmbeddingMode,
    pub filter_widths: Vec<usize>,
    pub n_filters: usize,
    pub dropout: f64,
    pub hidden_dim: usize,
    /// Fixed document length; by default the 95th percentile of training
    /// document lengths, capped at `max_len_cap`.
    pub max_len: Option<usize>,
    pub max_len_cap: usize,
    pub cnn_epochs: usize,
    pub cnn_lr: f64,
    pub batch_size: usize,
    /// Share of the training split held out for picking the best epoch.
    pub validation_fraction: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let graph = GraphConfig::default();
        let walk = WalkParams::default();
        let embed = EmbedConfig::default();
        let cnn = CnnHyperparams::default();
        let train = TrainConfig::default();
        PipelineConfig {
            dataset: None,
            test_dataset: None,
            format: DataFormat::Csv,
            strict: false,
            class_names: vec!["negative".into(), "positive".into()],
            out: PathBuf::from("out"),
            seed: 42,
            split_ratio: 0.8,
            window: graph.window,
            directed: graph.directed,
            weighted: graph.weighted,
            split_sentences: false,
            p: walk.p,
            q: walk.q,
            walk_length: walk.walk_length,
            walks_per_node: walk.walks_per_node,
            dims: embed.dims,
            embed_epochs: embed.epochs,
            embed_lr: embed.learning_rate,
            negatives: embed.negatives,
            context_window: embed.context_window,
            mode: cnn.mode,
            filter_widths: cnn.filter_widths,
            n_filters: cnn.n_filters,
            dropout: cnn.dropout,
            hidden_dim: cnn.hidden_dim,
            max_len: None,
            max_len_cap: 2633,
            cnn_epochs: train.epochs,
            cnn_lr: train.learning_rate,
            batch_size: train.batch_size,
            validation_fraction: 0.1,
        }
    }
}

mod mode_name {
    use super::EmbeddingMode;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(mode: &EmbeddingMode, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(mode.as_str())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<EmbeddingMode, D::Error> {
        let name = String::deserialize(d)?;
        name.parse().map_err(|_| de::Error::custom(format!("unknown mode {name:?}")))
    }
}

/// Per-stage seeds, each derived from the master seed and the stage name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSeeds {
    pub master: u64,
    pub split: u64,
    pub validation: u64,
    pub walks: u64,
    pub skipgram: u64,
    pub cnn_init: u64,
    pub cnn_train: u64,
}

impl StageSeeds {
    pub fn new(master: u64) -> Self {
        let d = |name| sentigraph_core::seed::derive_named(master, name);
        StageSeeds {
            master,
            split: d("split"),
            validation: d("validation"),
            walks: d("walks"),
            skipgram: d("skipgram"),
            cnn_init: d("cnn-init"),
            cnn_train: d("cnn-train"),
        }
    }
}

impl PipelineConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn seeds(&self) -> StageSeeds {
        StageSeeds::new(self.seed)
    }

    pub fn graph_config(&self) -> GraphConfig {
        GraphConfig { window: self.window, directed: self.directed, weighted: self.weighted }
    }

    pub fn walk_params(&self) -> WalkParams {
        WalkParams {
            p: self.p,
            q: self.q,
            walk_length: self.walk_length,
            walks_per_node: self.walks_per_node,
            seed: self.seeds().walks,
        }
    }

    pub fn embed_config(&self) -> EmbedConfig {
        EmbedConfig {
            dims: self.dims,
            epochs: self.embed_epochs,
            learning_rate: self.embed_lr,
            negatives: self.negatives,
            context_window: self.context_window,
            seed: self.seeds().skipgram,
        }
    }

    pub fn hyperparams(&self, max_len: usize, n_classes: usize) -> CnnHyperparams {
        CnnHyperparams {
            max_len,
            dims: self.dims,
            filter_widths: self.filter_widths.clone(),
            n_filters: self.n_filters,
            dropout: self.dropout,
            hidden_dim: self.hidden_dim,
            n_classes,
            mode: self.mode,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.cnn_epochs,
            learning_rate: self.cnn_lr,
            batch_size: self.batch_size,
            seed: self.seeds().cnn_train,
        }
    }

    /// Checks every stage's settings up front so a bad value fails before
    /// any work is done.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.graph_config().validate().map_err(|e| Error::Config(e.to_string()))?;
        self.walk_params().validate().map_err(|e| Error::Config(e.to_string()))?;
        self.embed_config().validate().map_err(|e| Error::Config(e.to_string()))?;
        let max_width = self.filter_widths.iter().copied().max().unwrap_or(0);
        let probe_len = self.max_len.unwrap_or(self.max_len_cap).max(max_width);
        self.hyperparams(probe_len, self.class_names.len())
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if let Some(len) = self.max_len {
            if len < max_width {
                return bad(format!("max_len {len} is shorter than the widest filter ({max_width})"));
            }
        }
        if self.max_len_cap < max_width {
            return bad(format!("max_len_cap {} is shorter than the widest filter", self.max_len_cap));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return bad(format!("split_ratio must lie strictly between 0 and 1, got {}", self.split_ratio));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad(format!("validation_fraction must lie in [0, 1), got {}", self.validation_fraction));
        }
        if !(self.cnn_lr >= 0.0 && self.cnn_lr.is_finite()) || self.batch_size == 0 {
            return bad("cnn_lr must be finite and non-negative and batch_size positive".into());
        }
        if self.class_names.len() < 2 {
            return bad("at least two class names are required".into());
        }
        let mut names = self.class_names.clone();
        names.sort();
        names.dedup();
        if names.len() != self.class_names.len() || names.iter().any(|n| n.trim().is_empty()) {
            return bad("class names must be distinct and non-empty".into());
        }
        Ok(())
    }
}
