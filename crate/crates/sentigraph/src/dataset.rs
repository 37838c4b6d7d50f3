//! Labelled document files: one `label,text` (or tab-separated) record per
//! line. Labels are class indices or class names.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sentigraph_core::seed;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("dataset not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("{}: no valid records", .0.display())]
    NoValidRows(PathBuf),
    #[error("{}:{line}: {message}", path.display())]
    Malformed { path: PathBuf, line: u64, message: String },
    #[error("{}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("class {class:?} has {count} documents; at least 2 are needed to split")]
    ClassTooSmall { class: String, count: usize },
    #[error("split ratio must lie strictly between 0 and 1, got {0}")]
    InvalidRatio(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    #[default]
    Csv,
    Tsv,
}

impl DataFormat {
    fn delimiter(self) -> u8 {
        match self {
            DataFormat::Csv => b',',
            DataFormat::Tsv => b'\t',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDocument {
    /// Source line number, unique within a file.
    pub doc_id: String,
    pub label: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledCorpus {
    pub class_names: Vec<String>,
    pub documents: Vec<LabeledDocument>,
}

impl LabeledCorpus {
    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.documents.iter().map(|d| d.label).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_names.len()];
        for d in &self.documents {
            counts[d.label] += 1;
        }
        counts
    }

    fn subset(&self, indices: &[usize]) -> LabeledCorpus {
        LabeledCorpus {
            class_names: self.class_names.clone(),
            documents: indices.iter().map(|&i| self.documents[i].clone()).collect(),
        }
    }

    /// Serializes in the format `load_dataset` reads, labels as indices.
    pub fn to_delimited(&self, format: DataFormat) -> String {
        let mut w = csv::WriterBuilder::new().delimiter(format.delimiter()).from_writer(Vec::new());
        for d in &self.documents {
            w.write_record([d.label.to_string().as_str(), d.text.as_str()]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }
}

fn parse_label(raw: &str, class_names: &[String]) -> Option<usize> {
    let raw = raw.trim();
    if let Ok(i) = raw.parse::<usize>() {
        return (i < class_names.len()).then_some(i);
    }
    class_names.iter().position(|c| c.eq_ignore_ascii_case(raw))
}

/// Reads a labelled corpus. A first line whose label does not parse is
/// taken as a header. Later bad records are logged and skipped, or are an
/// error when `strict` is set.
pub fn load_dataset(
    path: &Path,
    format: DataFormat,
    class_names: &[String],
    strict: bool,
) -> Result<LabeledCorpus, DatasetError> {
    if !path.is_file() {
        return Err(DatasetError::FileNotFound(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(format.delimiter())
        .quoting(format == DataFormat::Csv)
        .from_path(path)
        .map_err(|source| DatasetError::Read { path: path.to_path_buf(), source })?;
    let mut documents = Vec::new();
    let mut first = true;
    for record in reader.records() {
        let record = record.map_err(|source| DatasetError::Read { path: path.to_path_buf(), source })?;
        let line = record.position().map_or(0, |p| p.line());
        let was_first = std::mem::replace(&mut first, false);
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        let problem = if record.len() < 2 {
            Some("expected a label and a text field".to_string())
        } else {
            match parse_label(&record[0], class_names) {
                Some(label) => {
                    // Unquoted delimiters inside the text split it into extra fields.
                    let sep = char::from(format.delimiter()).to_string();
                    let text = record.iter().skip(1).collect::<Vec<_>>().join(&sep);
                    documents.push(LabeledDocument { doc_id: line.to_string(), label, text });
                    None
                }
                None if was_first => {
                    log::info!("{}:{line}: treating first line as a header", path.display());
                    None
                }
                None => Some(format!("unknown label {:?}", &record[0])),
            }
        };
        if let Some(message) = problem {
            if strict {
                return Err(DatasetError::Malformed { path: path.to_path_buf(), line, message });
            }
            log::warn!("{}:{line}: skipping record: {message}", path.display());
        }
    }
    if documents.is_empty() {
        return Err(DatasetError::NoValidRows(path.to_path_buf()));
    }
    Ok(LabeledCorpus { class_names: class_names.to_vec(), documents })
}

/// Stratified train/test split. Each class contributes
/// `round(n_c * ratio)` documents to training, clamped so both sides keep
/// at least one; both halves keep the original document order.
pub fn split(corpus: &LabeledCorpus, ratio: f64, seed: u64) -> Result<(LabeledCorpus, LabeledCorpus), DatasetError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(DatasetError::InvalidRatio(ratio));
    }
    let mut by_class = vec![Vec::new(); corpus.class_names.len()];
    for (i, d) in corpus.documents.iter().enumerate() {
        by_class[d.label].push(i);
    }
    let mut rng = seed::rng_from(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, mut members) in by_class.into_iter().enumerate() {
        let n = members.len();
        if n < 2 {
            return Err(DatasetError::ClassTooSmall { class: corpus.class_names[class].clone(), count: n });
        }
        members.shuffle(&mut rng);
        let n_train = ((n as f64 * ratio).round() as usize).clamp(1, n - 1);
        train.extend_from_slice(&members[..n_train]);
        test.extend_from_slice(&members[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((corpus.subset(&train), corpus.subset(&test)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn names() -> Vec<String> {
        vec!["negative".into(), "positive".into()]
    }

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn header_quotes_and_names() {
        let f = file("label,text\n1,\"great, really great\"\nnegative,awful\n0,meh, honestly\n");
        let c = load_dataset(f.path(), DataFormat::Csv, &names(), false).unwrap();
        let got: Vec<(usize, &str)> = c.documents.iter().map(|d| (d.label, d.text.as_str())).collect();
        assert_eq!(got, [(1, "great, really great"), (0, "awful"), (0, "meh, honestly")]);
        assert_eq!(c.documents[0].doc_id, "2");
    }

    #[test]
    fn malformed_rows_skip_or_fail() {
        let f = file("1\tfine\n7\tout of range\nlonely\n0\tok\n");
        let c = load_dataset(f.path(), DataFormat::Tsv, &names(), false).unwrap();
        assert_eq!(c.len(), 2);
        let err = load_dataset(f.path(), DataFormat::Tsv, &names(), true).unwrap_err();
        assert!(matches!(err, DatasetError::Malformed { line: 2, .. }), "{err}");
    }

    #[test]
    fn missing_and_empty_files() {
        let missing = load_dataset(Path::new("/nonexistent/x.csv"), DataFormat::Csv, &names(), false);
        assert!(matches!(missing, Err(DatasetError::FileNotFound(_))));
        let f = file("label,text\n");
        assert!(matches!(load_dataset(f.path(), DataFormat::Csv, &names(), false), Err(DatasetError::NoValidRows(_))));
    }

    fn corpus(labels: &[usize]) -> LabeledCorpus {
        LabeledCorpus {
            class_names: names(),
            documents: labels
                .iter()
                .enumerate()
                .map(|(i, &label)| LabeledDocument { doc_id: i.to_string(), label, text: format!("doc {i}") })
                .collect(),
        }
    }

    #[test]
    fn split_is_stratified_disjoint_and_seeded() {
        let labels: Vec<usize> = (0..103).map(|i| usize::from(i % 3 == 0)).collect();
        let c = corpus(&labels);
        let (train, test) = split(&c, 0.8, 5).unwrap();
        assert_eq!(train.len() + test.len(), c.len());
        for (class, &n) in c.class_counts().iter().enumerate() {
            let got = train.class_counts()[class] as f64;
            assert!((got - 0.8 * n as f64).abs() <= 1.0);
        }
        let mut ids: Vec<&str> = train.documents.iter().chain(&test.documents).map(|d| d.doc_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), c.len());
        assert_eq!(split(&c, 0.8, 5).unwrap(), (train.clone(), test));
        assert_ne!(split(&c, 0.8, 6).unwrap().0, train);
    }

    #[test]
    fn split_rejects_tiny_classes_and_bad_ratios() {
        assert!(matches!(split(&corpus(&[0, 0, 1]), 0.5, 0), Err(DatasetError::ClassTooSmall { .. })));
        assert!(matches!(split(&corpus(&[0, 0, 1, 1]), 1.0, 0), Err(DatasetError::InvalidRatio(_))));
        let (train, test) = split(&corpus(&[0, 0, 1, 1]), 0.99, 0).unwrap();
        assert_eq!((train.len(), test.len()), (2, 2));
    }

    #[test]
    fn delimited_round_trip() {
        let mut c = corpus(&[0, 1]);
        c.documents[0].text = "has, a comma and \"quotes\"".into();
        let f = file(&c.to_delimited(DataFormat::Csv));
        let back = load_dataset(f.path(), DataFormat::Csv, &names(), true).unwrap();
        assert_eq!(back.documents.iter().map(|d| &d.text).collect::<Vec<_>>(), c.documents.iter().map(|d| &d.text).collect::<Vec<_>>());
    }
}
