//! Text container for a trained classifier.
//!
//! Header lines are `key value`; each tensor follows as a `tensor <name>
//! <len>` line and one line of values. Values are written in shortest
//! round-trip form, so a saved model reloads bit-for-bit.

use std::fmt::Write as _;
use std::path::Path;

use sentigraph_core::convnet::CnnParams;
use sentigraph_core::{CnnHyperparams, CnnModel, EmbeddingMode, Vocabulary};

use crate::error::{Error, Result};
use crate::formats::{self, vocab_hash};

const MAGIC: &str = "SENTIGRAPH-CNN 1";

#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub model: CnnModel,
    pub class_names: Vec<String>,
    pub vocab_hash: String,
}

pub fn model_to_string(model: &CnnModel, class_names: &[String], vocab: &Vocabulary) -> String {
    let h = model.hyper();
    let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
    let mut out = String::new();
    writeln!(out, "{MAGIC}").unwrap();
    writeln!(out, "vocab_hash {}", vocab_hash(vocab)).unwrap();
    writeln!(out, "vocab_size {}", model.vocab_size()).unwrap();
    writeln!(out, "mode {}", h.mode).unwrap();
    writeln!(out, "max_len {}", h.max_len).unwrap();
    writeln!(out, "dims {}", h.dims).unwrap();
    writeln!(out, "filter_widths {}", join(&h.filter_widths)).unwrap();
    writeln!(out, "n_filters {}", h.n_filters).unwrap();
    writeln!(out, "dropout {}", h.dropout).unwrap();
    writeln!(out, "hidden_dim {}", h.hidden_dim).unwrap();
    writeln!(out, "n_classes {}", h.n_classes).unwrap();
    writeln!(out, "class_names {}", serde_json::to_string(class_names).unwrap()).unwrap();
    let params = model.params();
    for (name, values) in params.tensor_names(&h.filter_widths).iter().zip(params.tensors()) {
        writeln!(out, "tensor {name} {}", values.len()).unwrap();
        let line: Vec<String> = values.iter().map(f64::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn save_model(path: &Path, model: &CnnModel, class_names: &[String], vocab: &Vocabulary) -> Result<()> {
    formats::write_text(path, &model_to_string(model, class_names, vocab))
}

/// Parses a model file without checking it against a vocabulary.
pub fn parse_model(text: &str, path: &Path) -> Result<SavedModel> {
    let mut lines = text.lines().enumerate().peekable();
    match lines.next() {
        Some((_, MAGIC)) => {}
        _ => return Err(Error::parse(path, 1, format!("expected `{MAGIC}`"))),
    }
    let mut header = std::collections::BTreeMap::new();
    while let Some(&(i, line)) = lines.peek() {
        if line.starts_with("tensor ") {
            break;
        }
        lines.next();
        let (k, v) = line.split_once(' ').ok_or_else(|| Error::parse(path, i + 1, "expected `key value`"))?;
        header.insert(k.to_string(), (i + 1, v.to_string()));
    }
    let get = |key: &str| {
        header.get(key).ok_or_else(|| Error::parse(path, 1, format!("missing header field `{key}`")))
    };
    fn num<T: std::str::FromStr>(path: &Path, (line, v): &(usize, String)) -> Result<T> {
        v.parse().map_err(|_| Error::parse(path, *line, format!("bad value {v:?}")))
    }
    let mode_field = get("mode")?;
    let mode: EmbeddingMode = mode_field.1.parse().map_err(|_| Error::parse(path, mode_field.0, "unknown mode"))?;
    let widths_field = get("filter_widths")?;
    let filter_widths = widths_field.1.split(' ').map(|w| num(path, &(widths_field.0, w.to_string())))
        .collect::<Result<Vec<usize>>>()?;
    let hyper = CnnHyperparams {
        max_len: num(path, get("max_len")?)?,
        dims: num(path, get("dims")?)?,
        filter_widths,
        n_filters: num(path, get("n_filters")?)?,
        dropout: num(path, get("dropout")?)?,
        hidden_dim: num(path, get("hidden_dim")?)?,
        n_classes: num(path, get("n_classes")?)?,
        mode,
    };
    let vocab_size: usize = num(path, get("vocab_size")?)?;
    let names_field = get("class_names")?;
    let class_names: Vec<String> = serde_json::from_str(&names_field.1)
        .map_err(|e| Error::parse(path, names_field.0, e.to_string()))?;
    let vocab_hash = get("vocab_hash")?.1.clone();

    let mut tensors = Vec::new();
    while let Some((i, line)) = lines.next() {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(' ');
        let (Some("tensor"), Some(name), Some(len), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
            return Err(Error::parse(path, i + 1, "expected `tensor <name> <len>`"));
        };
        let len: usize = num(path, &(i + 1, len.to_string()))?;
        let (j, values) = lines.next().ok_or_else(|| Error::parse(path, i + 2, "missing tensor values"))?;
        let values: Vec<f64> = if values.is_empty() {
            Vec::new()
        } else {
            values.split(' ').map(|v| num(path, &(j + 1, v.to_string()))).collect::<Result<_>>()?
        };
        if values.len() != len {
            return Err(Error::parse(path, j + 1, format!("tensor {name} declares {len} values, found {}", values.len())));
        }
        tensors.push((name.to_string(), values));
    }

    let n_channels = hyper.mode.channels().len();
    let n_widths = hyper.filter_widths.len();
    let skeleton = CnnParams {
        channels: vec![Vec::new(); n_channels],
        filters: Vec::new(),
        filter_bias: Vec::new(),
        hidden_w: Vec::new(),
        hidden_b: Vec::new(),
        out_w: Vec::new(),
        out_b: Vec::new(),
    };
    let expected_names = skeleton.tensor_names(&hyper.filter_widths);
    let found: Vec<&str> = tensors.iter().map(|(n, _)| n.as_str()).collect();
    if found != expected_names.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(Error::parse(path, 1, format!("expected tensors {expected_names:?}, found {found:?}")));
    }
    let mut it = tensors.into_iter().map(|(_, v)| v);
    let mut take = |k: usize| it.by_ref().take(k).collect::<Vec<_>>();
    let channels = take(n_channels);
    let filters = take(n_widths);
    let filter_bias = take(n_widths);
    let mut rest = take(4).into_iter();
    let mut next = || rest.next().unwrap();
    let params = CnnParams {
        channels,
        filters,
        filter_bias,
        hidden_w: next(),
        hidden_b: next(),
        out_w: next(),
        out_b: next(),
    };
    let model = CnnModel::from_parts(hyper, vocab_size, params)?;
    Ok(SavedModel { model, class_names, vocab_hash })
}

/// Loads a model and rejects it unless it was trained against `vocab`.
pub fn load_model(path: &Path, vocab: &Vocabulary) -> Result<SavedModel> {
    let saved = parse_model(&formats::read_text(path)?, path)?;
    let found = vocab_hash(vocab);
    if saved.vocab_hash != found {
        return Err(Error::VocabularyMismatch { expected: saved.vocab_hash, found });
    }
    Ok(saved)
}
