//! Plain-text persistence for graphs, vocabularies and embeddings.
//!
//! * graph: `GRAPH <n> <directed|undirected>` then `src\tdst\tweight` per
//!   edge (undirected edges once, `src < dst`);
//! * vocabulary: `id\ttoken` per line;
//! * embeddings: `<n> <d>` then `token v_1 ... v_d` with six significant
//!   digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sentigraph_core::{EmbeddingMatrix, Vocabulary, WordGraph};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// `%g`-style formatting with six significant digits.
pub fn fmt_sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let fixed = format!("{:.*}", (5 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn graph_to_string(graph: &WordGraph) -> String {
    let kind = if graph.is_directed() { "directed" } else { "undirected" };
    let mut out = format!("GRAPH {} {kind}\n", graph.n_nodes());
    for (src, dst, w) in graph.edges() {
        writeln!(out, "{src}\t{dst}\t{w}").unwrap();
    }
    out
}

pub fn parse_graph(text: &str, path: &Path) -> Result<WordGraph> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::parse(path, 1, "missing GRAPH header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (n, directed) = match fields.as_slice() {
        ["GRAPH", n, kind] => {
            let n: usize = n.parse().map_err(|_| Error::parse(path, 1, "bad node count"))?;
            let directed = match *kind {
                "directed" => true,
                "undirected" => false,
                other => return Err(Error::parse(path, 1, format!("unknown graph kind {other:?}"))),
            };
            (n, directed)
        }
        _ => return Err(Error::parse(path, 1, "expected `GRAPH <n> <directed|undirected>`")),
    };
    let mut edges = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        let bad = || Error::parse(path, i + 1, "expected `src\\tdst\\tweight`");
        let [src, dst, w] = parts.as_slice() else { return Err(bad()) };
        edges.push((
            src.parse().map_err(|_| bad())?,
            dst.parse().map_err(|_| bad())?,
            w.parse::<f64>().map_err(|_| bad())?,
        ));
    }
    Ok(WordGraph::from_edges(n, directed, edges)?)
}

pub fn vocab_to_string(vocab: &Vocabulary) -> String {
    let mut out = String::new();
    for (id, token) in vocab.tokens().iter().enumerate() {
        writeln!(out, "{id}\t{token}").unwrap();
    }
    out
}

pub fn parse_vocab(text: &str, path: &Path) -> Result<Vocabulary> {
    let mut tokens = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let bad = |m: &str| Error::parse(path, i + 1, m);
        let (id, token) = line.split_once('\t').ok_or_else(|| bad("expected `id\\ttoken`"))?;
        if id.parse::<usize>().ok() != Some(tokens.len()) {
            return Err(bad("ids must be dense and in order"));
        }
        tokens.push(token.to_string());
    }
    Ok(Vocabulary::from_tokens(tokens)?)
}

/// Hex SHA-256 of the vocabulary file contents.
pub fn vocab_hash(vocab: &Vocabulary) -> String {
    hex::encode(Sha256::digest(vocab_to_string(vocab).as_bytes()))
}

pub fn embeddings_to_string(vocab: &Vocabulary, emb: &EmbeddingMatrix) -> String {
    let mut out = format!("{} {}\n", emb.n_nodes(), emb.dims());
    for (id, token) in vocab.tokens().iter().enumerate() {
        out.push_str(token);
        for v in emb.row(id) {
            out.push(' ');
            out.push_str(&fmt_sig6(*v));
        }
        out.push('\n');
    }
    out
}

pub fn parse_embeddings(text: &str, path: &Path) -> Result<(Vocabulary, EmbeddingMatrix)> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::parse(path, 1, "missing `<n> <d>` header"))?;
    let dims: Vec<usize> = header.split_whitespace().map(str::parse).collect::<Result<_, _>>()
        .map_err(|_| Error::parse(path, 1, "bad header"))?;
    let [n, d] = dims[..] else { return Err(Error::parse(path, 1, "expected `<n> <d>`")) };
    let mut tokens = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * d);
    for (i, line) in lines {
        let mut parts = line.split(' ');
        let token = parts.next().filter(|t| !t.is_empty()).ok_or_else(|| Error::parse(path, i + 1, "missing token"))?;
        let row: Vec<f64> = parts.map(str::parse).collect::<Result<_, _>>()
            .map_err(|_| Error::parse(path, i + 1, "bad value"))?;
        if row.len() != d {
            return Err(Error::parse(path, i + 1, format!("expected {d} values, found {}", row.len())));
        }
        tokens.push(token.to_string());
        data.extend(row);
    }
    if tokens.len() != n {
        return Err(Error::parse(path, 1, format!("header says {n} rows, found {}", tokens.len())));
    }
    let vocab = Vocabulary::from_tokens(tokens)?;
    Ok((vocab, EmbeddingMatrix::from_center(n, d, data)?))
}

/// Center vectors as they read back from the embedding file.
pub fn round_to_file_precision(vocab: &Vocabulary, emb: &EmbeddingMatrix) -> EmbeddingMatrix {
    let (_, rounded) = parse_embeddings(&embeddings_to_string(vocab, emb), Path::new("<memory>"))
        .expect("embedding text written by this module parses");
    rounded
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use sentigraph_core::textgraph::{build_corpus_graph, tokenize, GraphConfig};

    #[test]
    fn sig6_examples() {
        assert_eq!(fmt_sig6(0.0), "0");
        assert_eq!(fmt_sig6(1.0), "1");
        assert_eq!(fmt_sig6(-0.123456789), "-0.123457");
        assert_eq!(fmt_sig6(123456.7), "123457");
        assert_eq!(fmt_sig6(1234567.0), "1.23457e6");
        assert_eq!(fmt_sig6(0.0000123456), "1.23456e-5");
        assert_eq!(fmt_sig6(0.000123456), "0.000123456");
        assert_eq!(fmt_sig6(9.999996), "10");
    }

    proptest! {
        #[test]
        fn sig6_round_trips(x in -1e8f64..1e8) {
            let s = fmt_sig6(x);
            let back: f64 = s.parse().unwrap();
            prop_assert_eq!(fmt_sig6(back), s);
            prop_assert!((back - x).abs() <= 5e-6 * x.abs() + 1e-300);
        }
    }

    #[test]
    fn graph_file_round_trip() {
        let docs = [tokenize("a good movie is a good movie", "1"), tokenize("bad movie", "2")];
        for directed in [true, false] {
            let cfg = GraphConfig { directed, ..GraphConfig::default() };
            let (g, vocab) = build_corpus_graph(&docs, &cfg).unwrap();
            let text = graph_to_string(&g);
            assert_eq!(parse_graph(&text, Path::new("g")).unwrap(), g);
            assert_eq!(parse_vocab(&vocab_to_string(&vocab), Path::new("v")).unwrap().tokens(), vocab.tokens());
        }
        let g = WordGraph::from_edges(3, true, [(0, 1, 2.0), (2, 0, 1.0)]).unwrap();
        assert_eq!(graph_to_string(&g), "GRAPH 3 directed\n0\t1\t2\n2\t0\t1\n");
    }

    #[test]
    fn malformed_files_report_lines() {
        let err = parse_graph("GRAPH 2 directed\n0\t1\n", Path::new("g.txt")).unwrap_err();
        assert!(err.to_string().starts_with("g.txt:2:"), "{err}");
        assert!(parse_graph("GRAPH 2 sideways\n", Path::new("g")).is_err());
        assert!(parse_vocab("1\ta\n", Path::new("v")).is_err());
        assert!(parse_embeddings("2 2\na 1 2\n", Path::new("e")).is_err());
        assert!(parse_embeddings("1 2\na 1\n", Path::new("e")).is_err());
    }

    #[test]
    fn embedding_file_round_trip() {
        let vocab = Vocabulary::from_tokens(vec!["x".into(), "y".into()]).unwrap();
        let emb = EmbeddingMatrix::from_center(2, 3, vec![0.1234567, -2.0, 1e-7, 3.0, 0.0, -0.5]).unwrap();
        let text = embeddings_to_string(&vocab, &emb);
        assert_eq!(text, "2 3\nx 0.123457 -2 1e-7\ny 3 0 -0.5\n");
        let (v2, e2) = parse_embeddings(&text, Path::new("e")).unwrap();
        assert_eq!(v2.tokens(), vocab.tokens());
        assert_eq!(embeddings_to_string(&v2, &e2), text);
    }
}
