//! The end-to-end pipeline: graph, embeddings, classifier, evaluation.
//!
//! Each stage reads its inputs from and writes its outputs to the output
//! directory, so running the stages one at a time gives the same artifacts
//! as a single `run`.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sentigraph_core::convnet::{self, EpochStats, TrainOutcome};
use sentigraph_core::embed::{generate_walk, train_embeddings, EmbeddingRun, TransitionTables};
use sentigraph_core::eval::{confusion, metrics};
use sentigraph_core::textgraph::{build_corpus_graph, split_sentences, tokenize};
use sentigraph_core::{
    CnnModel, ConfusionMatrix, EmbedError, EmbeddingMatrix, EncodedDoc, EvalReport, TokenSequence, Vocabulary,
    WalkCorpus, WalkParams, WordGraph,
};

use crate::config::PipelineConfig;
use crate::dataset::{load_dataset, split, LabeledCorpus};
use crate::error::{Error, Result};
use crate::formats;
use crate::model_file;
use crate::report::{GraphSummary, Report};

pub const GRAPH_FILE: &str = "graph.txt";
pub const VOCAB_FILE: &str = "vocab.txt";
pub const EMBEDDINGS_FILE: &str = "embeddings.txt";
pub const EMBED_STATS_FILE: &str = "embed_stats.json";
pub const MODEL_FILE: &str = "model.txt";
pub const TRAIN_STATS_FILE: &str = "train_stats.json";
pub const REPORT_TEXT_FILE: &str = "report.txt";
pub const REPORT_JSON_FILE: &str = "report.json";

/// Tokens of a whole document, as the classifier sees it.
pub fn document_tokens(doc_id: &str, text: &str) -> TokenSequence {
    tokenize(text, doc_id)
}

/// Token sequences that become graph units: whole documents, or sentences
/// when `split_sentences` is set.
pub fn graph_units(corpus: &LabeledCorpus, by_sentence: bool) -> Vec<TokenSequence> {
    let mut units = Vec::new();
    for doc in &corpus.documents {
        if by_sentence {
            for (k, sentence) in split_sentences(&doc.text).into_iter().enumerate() {
                units.push(tokenize(sentence, format!("{}#{k}", doc.doc_id)));
            }
        } else {
            units.push(document_tokens(&doc.doc_id, &doc.text));
        }
    }
    units
}

pub fn build_graph(train: &LabeledCorpus, cfg: &PipelineConfig) -> Result<(WordGraph, Vocabulary)> {
    let units = graph_units(train, cfg.split_sentences);
    Ok(build_corpus_graph(&units, &cfg.graph_config())?)
}

/// Same walks as the serial generator, produced on all cores.
pub fn parallel_walks(graph: &WordGraph, params: &WalkParams) -> Result<WalkCorpus, EmbedError> {
    params.validate()?;
    if graph.n_nodes() == 0 {
        return Err(EmbedError::EmptyGraph);
    }
    let tables = TransitionTables::new(graph, params.p, params.q);
    let n = graph.n_nodes();
    let starts: Vec<(usize, usize)> =
        (0..params.walks_per_node).flat_map(|i| (0..n).map(move |u| (u, i))).collect();
    let walks = starts.into_par_iter().map(|(u, i)| generate_walk(graph, &tables, params, u, i)).collect();
    Ok(WalkCorpus { n_nodes: n, walks, degrees: graph.degrees() })
}

pub fn learn_embeddings(graph: &WordGraph, cfg: &PipelineConfig) -> Result<EmbeddingRun> {
    let walks = parallel_walks(graph, &cfg.walk_params())?;
    Ok(train_embeddings(&walks, &cfg.embed_config())?)
}

/// Configured length, or the 95th percentile of training document lengths
/// clamped to `[widest filter, max_len_cap]`.
pub fn choose_max_len(train: &LabeledCorpus, cfg: &PipelineConfig) -> usize {
    let max_width = cfg.filter_widths.iter().copied().max().unwrap_or(1);
    if let Some(len) = cfg.max_len {
        return len;
    }
    let mut lengths: Vec<usize> =
        train.documents.iter().map(|d| document_tokens(&d.doc_id, &d.text).len()).collect();
    lengths.sort_unstable();
    let pct = lengths
        .get(((lengths.len() as f64 * 0.95).ceil() as usize).saturating_sub(1))
        .copied()
        .unwrap_or(0);
    pct.clamp(max_width, cfg.max_len_cap.max(max_width))
}

fn encode_all(corpus: &LabeledCorpus, vocab: &Vocabulary, max_len: usize) -> Vec<(EncodedDoc, usize)> {
    corpus
        .documents
        .iter()
        .map(|d| (convnet::encode_document(&document_tokens(&d.doc_id, &d.text), vocab, max_len), d.label))
        .collect()
}

/// Trains the classifier on `train`, holding out `validation_fraction` of
/// it (stratified) to pick the best epoch. Classes too small to carve a
/// validation share train on everything.
pub fn train_classifier(
    train: &LabeledCorpus,
    vocab: &Vocabulary,
    embeddings: &EmbeddingMatrix,
    cfg: &PipelineConfig,
) -> Result<(TrainOutcome, usize)> {
    let seeds = cfg.seeds();
    let max_len = choose_max_len(train, cfg);
    let hyper = cfg.hyperparams(max_len, train.class_names.len());
    let (fit, valid) = if cfg.validation_fraction > 0.0 {
        match split(train, 1.0 - cfg.validation_fraction, seeds.validation) {
            Ok(parts) => parts,
            Err(e) => {
                log::warn!("no validation split ({e}); selecting the final epoch");
                (train.clone(), LabeledCorpus { class_names: train.class_names.clone(), documents: Vec::new() })
            }
        }
    } else {
        (train.clone(), LabeledCorpus { class_names: train.class_names.clone(), documents: Vec::new() })
    };
    let model = CnnModel::new(hyper, embeddings, seeds.cnn_init)?;
    let outcome = convnet::train(
        model,
        &encode_all(&fit, vocab, max_len),
        &encode_all(&valid, vocab, max_len),
        &cfg.train_config(),
    )?;
    Ok((outcome, max_len))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub predictions: Vec<usize>,
    pub confusion: ConfusionMatrix,
    pub report: EvalReport,
}

pub fn evaluate(model: &CnnModel, vocab: &Vocabulary, test: &LabeledCorpus) -> Result<Evaluation> {
    let mut predictions = Vec::with_capacity(test.len());
    for doc in &test.documents {
        let encoded = model.encode(&document_tokens(&doc.doc_id, &doc.text), vocab);
        predictions.push(model.predict(&encoded)?.0);
    }
    let confusion = confusion(&predictions, &test.labels(), test.class_names.len())?;
    let report = metrics(&confusion)?;
    Ok(Evaluation { predictions, confusion, report })
}

/// Loads the training and test corpora: the configured test file, or a
/// stratified split of the dataset.
pub fn load_inputs(cfg: &PipelineConfig) -> Result<(LabeledCorpus, LabeledCorpus)> {
    let dataset = cfg.dataset.as_deref().ok_or_else(|| Error::Config("no dataset given".into()))?;
    let corpus = load_dataset(dataset, cfg.format, &cfg.class_names, cfg.strict)?;
    match &cfg.test_dataset {
        Some(test) => Ok((corpus, load_dataset(test, cfg.format, &cfg.class_names, cfg.strict)?)),
        None => Ok(split(&corpus, cfg.split_ratio, cfg.seeds().split)?),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedStats {
    pub initial_loss: f64,
    pub epoch_loss: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub train_loss: f64,
    pub valid_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainStats {
    pub n_train: usize,
    pub max_len: usize,
    pub best_epoch: usize,
    pub history: Vec<EpochRecord>,
}

impl From<&EpochStats> for EpochRecord {
    fn from(s: &EpochStats) -> Self {
        EpochRecord { train_loss: s.train_loss, valid_accuracy: s.valid_accuracy }
    }
}

fn log_seeds(stage: &str, cfg: &PipelineConfig) {
    let s = cfg.seeds();
    log::info!(
        "{stage}: master seed {} -> split {} validation {} walks {} skipgram {} cnn-init {} cnn-train {}",
        s.master, s.split, s.validation, s.walks, s.skipgram, s.cnn_init, s.cnn_train
    );
}

fn out_path(cfg: &PipelineConfig, name: &str) -> PathBuf {
    cfg.out.join(name)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    formats::write_text(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = formats::read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
}

pub fn read_graph(cfg: &PipelineConfig) -> Result<(WordGraph, Vocabulary)> {
    let gpath = out_path(cfg, GRAPH_FILE);
    let vpath = out_path(cfg, VOCAB_FILE);
    let graph = formats::parse_graph(&formats::read_text(&gpath)?, &gpath)?;
    let vocab = formats::parse_vocab(&formats::read_text(&vpath)?, &vpath)?;
    if graph.n_nodes() != vocab.len() {
        return Err(Error::parse(&gpath, 1, format!("graph has {} nodes but vocabulary {}", graph.n_nodes(), vocab.len())));
    }
    Ok((graph, vocab))
}

pub fn read_embeddings(cfg: &PipelineConfig) -> Result<(Vocabulary, EmbeddingMatrix)> {
    let path = out_path(cfg, EMBEDDINGS_FILE);
    formats::parse_embeddings(&formats::read_text(&path)?, &path)
}

pub fn read_vocab(cfg: &PipelineConfig) -> Result<Vocabulary> {
    let path = out_path(cfg, VOCAB_FILE);
    formats::parse_vocab(&formats::read_text(&path)?, &path)
}

/// Builds the co-occurrence graph from the training documents.
pub fn stage_graph(cfg: &PipelineConfig) -> Result<(WordGraph, Vocabulary)> {
    cfg.validate()?;
    log_seeds("graph", cfg);
    let (train, _) = load_inputs(cfg)?;
    let (graph, vocab) = build_graph(&train, cfg)?;
    log::info!("graph: {} nodes, {} edges from {} training documents", graph.n_nodes(), graph.edge_count(), train.len());
    formats::write_text(&out_path(cfg, GRAPH_FILE), &formats::graph_to_string(&graph))?;
    formats::write_text(&out_path(cfg, VOCAB_FILE), &formats::vocab_to_string(&vocab))?;
    Ok((graph, vocab))
}

pub fn stage_embed(cfg: &PipelineConfig) -> Result<EmbedStats> {
    cfg.validate()?;
    log_seeds("embed", cfg);
    let (graph, vocab) = read_graph(cfg)?;
    let run = learn_embeddings(&graph, cfg)?;
    log::info!("embeddings: loss {:.4} -> {:?}", run.initial_loss, run.epoch_loss);
    formats::write_text(&out_path(cfg, EMBEDDINGS_FILE), &formats::embeddings_to_string(&vocab, &run.embeddings))?;
    let stats = EmbedStats { initial_loss: run.initial_loss, epoch_loss: run.epoch_loss };
    write_json(&out_path(cfg, EMBED_STATS_FILE), &stats)?;
    Ok(stats)
}

pub fn stage_train(cfg: &PipelineConfig) -> Result<TrainStats> {
    cfg.validate()?;
    log_seeds("train", cfg);
    let (train, _) = load_inputs(cfg)?;
    let (vocab, embeddings) = read_embeddings(cfg)?;
    if embeddings.dims() != cfg.dims {
        return Err(Error::Config(format!("embeddings have {} dims but dims is {}", embeddings.dims(), cfg.dims)));
    }
    let (outcome, max_len) = train_classifier(&train, &vocab, &embeddings, cfg)?;
    model_file::save_model(&out_path(cfg, MODEL_FILE), &outcome.model, &cfg.class_names, &vocab)?;
    let stats = TrainStats {
        n_train: train.len(),
        max_len,
        best_epoch: outcome.best_epoch,
        history: outcome.history.iter().map(EpochRecord::from).collect(),
    };
    write_json(&out_path(cfg, TRAIN_STATS_FILE), &stats)?;
    Ok(stats)
}

/// Scores the saved model on the test documents and writes both reports.
pub fn stage_eval(cfg: &PipelineConfig) -> Result<Report> {
    cfg.validate()?;
    log_seeds("eval", cfg);
    let (_, test) = load_inputs(cfg)?;
    let vocab = read_vocab(cfg)?;
    let saved = model_file::load_model(&out_path(cfg, MODEL_FILE), &vocab)?;
    let evaluation = evaluate(&saved.model, &vocab, &test)?;
    let optional = |name: &str| {
        let path = out_path(cfg, name);
        path.is_file().then_some(path)
    };
    let embed_stats: Option<EmbedStats> = optional(EMBED_STATS_FILE).map(|p| read_json(&p)).transpose()?;
    let train_stats: Option<TrainStats> = optional(TRAIN_STATS_FILE).map(|p| read_json(&p)).transpose()?;
    let mut report = Report::new(cfg, &evaluation, &saved.model, vocab.len());
    report.graph = read_graph(cfg).ok().map(|(g, _)| GraphSummary::new(&g, cfg));
    report.embedding = embed_stats;
    report.training = train_stats;
    formats::write_text(&out_path(cfg, REPORT_TEXT_FILE), &report.to_text())?;
    formats::write_text(&out_path(cfg, REPORT_JSON_FILE), &report.to_json()?)?;
    Ok(report)
}

/// All four stages in order.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<Report> {
    stage_graph(cfg)?;
    stage_embed(cfg)?;
    stage_train(cfg)?;
    stage_eval(cfg)
}

/// Predicted class index and class probabilities.
pub type Prediction = (usize, Vec<f64>);

/// Class names and a prediction per text, from the saved model.
pub fn predict_texts(cfg: &PipelineConfig, texts: &[String]) -> Result<(Vec<String>, Vec<Prediction>)> {
    let vocab = read_vocab(cfg)?;
    let saved = model_file::load_model(&out_path(cfg, MODEL_FILE), &vocab)?;
    let mut out = Vec::with_capacity(texts.len());
    for (i, text) in texts.iter().enumerate() {
        let encoded = saved.model.encode(&document_tokens(&i.to_string(), text), &vocab);
        out.push(saved.model.predict(&encoded)?);
    }
    Ok((saved.class_names, out))
}

