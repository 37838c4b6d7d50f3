//! Evaluation reports: an aligned text table and a JSON document with the
//! same numbers plus run metadata.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sentigraph_core::{CnnModel, WordGraph};

use crate::config::{PipelineConfig, StageSeeds};
use crate::error::Result;
use crate::pipeline::{EmbedStats, Evaluation, TrainStats};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRow {
    pub name: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
    pub directed: bool,
    pub weighted: bool,
    pub window: usize,
}

impl GraphSummary {
    pub fn new(graph: &WordGraph, cfg: &PipelineConfig) -> Self {
        GraphSummary {
            nodes: graph.n_nodes(),
            edges: graph.edge_count(),
            directed: graph.is_directed(),
            weighted: cfg.weighted,
            window: cfg.window,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub n_test: u64,
    pub classes: Vec<ClassRow>,
    /// `confusion[gold][predicted]`.
    pub confusion: Vec<Vec<u64>>,
    pub mode: String,
    pub max_len: usize,
    pub vocab_size: usize,
    pub graph: Option<GraphSummary>,
    pub embedding: Option<EmbedStats>,
    pub training: Option<TrainStats>,
    pub seeds: StageSeeds,
    /// Effective configuration, without the output directory.
    pub config: serde_json::Value,
}

impl Report {
    pub fn new(cfg: &PipelineConfig, evaluation: &Evaluation, model: &CnnModel, vocab_size: usize) -> Self {
        let r = &evaluation.report;
        let cm = &evaluation.confusion;
        let n = cm.n_classes();
        let classes = r
            .classes
            .iter()
            .enumerate()
            .map(|(i, m)| ClassRow {
                name: cfg.class_names.get(i).cloned().unwrap_or_else(|| i.to_string()),
                precision: m.precision,
                recall: m.recall,
                f1: m.f1,
                support: m.support,
            })
            .collect();
        let mut config = serde_json::to_value(cfg).expect("config serializes");
        if let Some(map) = config.as_object_mut() {
            map.remove("out");
        }
        Report {
            accuracy: r.accuracy,
            macro_f1: r.macro_f1,
            n_test: r.total,
            classes,
            confusion: (0..n).map(|g| (0..n).map(|p| cm.get(g, p)).collect()).collect(),
            mode: model.hyper().mode.to_string(),
            max_len: model.hyper().max_len,
            vocab_size,
            graph: None,
            embedding: None,
            training: None,
            seeds: cfg.seeds(),
            config,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn to_text(&self) -> String {
        let name_w = self.classes.iter().map(|c| c.name.len()).chain(["macro-F1".len()]).max().unwrap_or(8);
        let mut out = String::new();
        writeln!(out, "{:<name_w$}  {:>9}  {:>9}  {:>9}  {:>7}", "class", "precision", "recall", "f1", "support").unwrap();
        for c in &self.classes {
            writeln!(
                out,
                "{:<name_w$}  {:>9.4}  {:>9.4}  {:>9.4}  {:>7}",
                c.name, c.precision, c.recall, c.f1, c.support
            )
            .unwrap();
        }
        writeln!(out).unwrap();
        writeln!(out, "{:<name_w$}  {:>9.4}  {:>9}  {:>9}  {:>7}", "accuracy", self.accuracy, "", "", self.n_test).unwrap();
        writeln!(out, "{:<name_w$}  {:>9}  {:>9}  {:>9.4}", "macro-F1", "", "", self.macro_f1).unwrap();
        writeln!(out).unwrap();
        writeln!(out, "mode {}, max_len {}, vocabulary {}, seed {}", self.mode, self.max_len, self.vocab_size, self.seeds.master)
            .unwrap();
        writeln!(out).unwrap();
        writeln!(out, "confusion (rows gold, columns predicted)").unwrap();
        let cell_w = self
            .confusion
            .iter()
            .flatten()
            .map(|v| v.to_string().len())
            .chain(self.classes.iter().map(|c| c.name.len()))
            .max()
            .unwrap_or(1);
        write!(out, "{:<name_w$}", "").unwrap();
        for c in &self.classes {
            write!(out, "  {:>cell_w$}", c.name).unwrap();
        }
        writeln!(out).unwrap();
        for (c, row) in self.classes.iter().zip(&self.confusion) {
            write!(out, "{:<name_w$}", c.name).unwrap();
            for v in row {
                write!(out, "  {v:>cell_w$}").unwrap();
            }
            writeln!(out).unwrap();
        }
        out
    }
}
