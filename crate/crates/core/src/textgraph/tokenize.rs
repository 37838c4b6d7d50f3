use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::{NodeId, TextGraphError};

/// Lowercased tokens of one document (or one sentence unit of it).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSequence {
    pub doc_id: String,
    pub tokens: Vec<String>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Lowercase `text` and split it into word tokens.
///
/// Tokens are maximal runs of alphanumeric characters. An apostrophe between
/// two alphanumerics stays inside the token (`don't`). Everything else is a
/// separator and is dropped. Stop words are kept.
pub fn tokenize(text: &str, doc_id: impl Into<String>) -> TokenSequence {
    let lower = text.to_lowercase();
    let chars: Vec<char> = lower.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let inner_apostrophe =
            is_apostrophe(c) && !current.is_empty() && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
        if c.is_alphanumeric() || inner_apostrophe {
            current.push(c);
        } else if !current.is_empty() {
            tokens.push(core::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    TokenSequence { doc_id: doc_id.into(), tokens }
}

/// Split raw text into sentence units at `.`, `!` and `?`.
///
/// Pieces that are blank after trimming are dropped; terminators are not
/// included in the pieces.
pub fn split_sentences(text: &str) -> Vec<&str> {
    text.split(['.', '!', '?'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

/// Token <-> node id bijection with corpus frequencies.
///
/// Ids are assigned in order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: BTreeMap<String, NodeId>,
    counts: Vec<u64>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_sequences<'a, I>(sequences: I) -> Self
    where
        I: IntoIterator<Item = &'a TokenSequence>,
    {
        let mut vocab = Vocabulary::new();
        for seq in sequences {
            for token in &seq.tokens {
                vocab.insert(token);
            }
        }
        vocab
    }

    /// Rebuild a vocabulary from an id-ordered token list (counts are zero).
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self, TextGraphError> {
        let mut index = BTreeMap::new();
        for (id, token) in tokens.iter().enumerate() {
            if token.is_empty() {
                return Err(TextGraphError::UnknownToken(String::new()));
            }
            if index.insert(token.clone(), id).is_some() {
                return Err(TextGraphError::DuplicateToken(token.clone()));
            }
        }
        let counts = alloc::vec![0; tokens.len()];
        Ok(Vocabulary { tokens, index, counts })
    }

    /// Count one occurrence of `token`, assigning a fresh id if needed.
    pub fn insert(&mut self, token: &str) -> NodeId {
        if let Some(&id) = self.index.get(token) {
            self.counts[id] += 1;
            return id;
        }
        let id = self.tokens.len();
        self.tokens.push(String::from(token));
        self.index.insert(String::from(token), id);
        self.counts.push(1);
        id
    }

    pub fn id(&self, token: &str) -> Option<NodeId> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: NodeId) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    pub fn count(&self, id: NodeId) -> u64 {
        self.counts.get(id).copied().unwrap_or(0)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Map a sequence to ids, failing on the first unknown token.
    pub fn ids(&self, seq: &TokenSequence) -> Result<Vec<NodeId>, TextGraphError> {
        seq.tokens
            .iter()
            .map(|t| self.id(t).ok_or_else(|| TextGraphError::UnknownToken(t.clone())))
            .collect()
    }
}
