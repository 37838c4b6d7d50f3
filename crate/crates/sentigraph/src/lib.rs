//! Sentiment classification from word co-occurrence graphs: file formats,
//! dataset loading, the staged pipeline, reports and sweeps built on
//! `sentigraph-core`.

pub mod config;
pub mod dataset;
pub mod error;
pub mod formats;
pub mod model_file;
pub mod pipeline;
pub mod report;
pub mod sweep;
pub mod synthetic;

pub use config::{PipelineConfig, StageSeeds};
pub use dataset::{load_dataset, split, DataFormat, DatasetError, LabeledCorpus, LabeledDocument};
pub use error::{Error, Result};
pub use pipeline::run_pipeline;
pub use report::Report;
