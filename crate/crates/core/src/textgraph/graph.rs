use alloc::vec::Vec;

use super::{GraphConfig, NodeId, TextGraphError, TokenSequence, Vocabulary};

/// Weighted co-occurrence graph in compressed sparse row form.
///
/// Undirected graphs store each edge as two arcs with equal weight. Arcs out
/// of a node are sorted by target id, which keeps [`WordGraph::edge_weight`]
/// a binary search.
#[derive(Debug, Clone, PartialEq)]
pub struct WordGraph {
    directed: bool,
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    weights: Vec<f64>,
}

impl WordGraph {
    pub fn empty(n_nodes: usize, directed: bool) -> Self {
        WordGraph {
            directed,
            offsets: alloc::vec![0; n_nodes + 1],
            targets: Vec::new(),
            weights: Vec::new(),
        }
    }

    /// Build from an explicit edge list. Undirected edges are listed once
    /// (either orientation); duplicates are summed.
    pub fn from_edges<I>(n_nodes: usize, directed: bool, edges: I) -> Result<Self, TextGraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId, f64)>,
    {
        let mut builder = GraphBuilder::new(n_nodes, directed);
        for (src, dst, weight) in edges {
            if src >= n_nodes || dst >= n_nodes || src == dst || !(weight > 0.0) || !weight.is_finite()
            {
                return Err(TextGraphError::InvalidEdge { src, dst, weight });
            }
            builder.push(src, dst, weight, true);
        }
        builder.maybe_compact();
        Ok(builder.finish())
    }

    /// `arcs` must be sorted by `(src, dst)` without repeats.
    fn from_sorted_arcs<I>(n_nodes: usize, directed: bool, arcs: I) -> Self
    where
        I: ExactSizeIterator<Item = (NodeId, NodeId, f64)>,
    {
        let mut offsets = alloc::vec![0; n_nodes + 1];
        let mut targets = Vec::with_capacity(arcs.len());
        let mut weights = Vec::with_capacity(arcs.len());
        for (src, dst, w) in arcs {
            offsets[src + 1] += 1;
            targets.push(dst);
            weights.push(w);
        }
        for i in 0..n_nodes {
            offsets[i + 1] += offsets[i];
        }
        WordGraph { directed, offsets, targets, weights }
    }

    pub fn n_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Number of stored arcs (twice the edge count when undirected).
    pub fn arc_count(&self) -> usize {
        self.targets.len()
    }

    pub fn edge_count(&self) -> usize {
        if self.directed {
            self.arc_count()
        } else {
            self.arc_count() / 2
        }
    }

    /// Index range of the arcs leaving `node`.
    pub fn arc_range(&self, node: NodeId) -> core::ops::Range<usize> {
        self.offsets[node]..self.offsets[node + 1]
    }

    pub fn successors(&self, node: NodeId) -> &[NodeId] {
        &self.targets[self.arc_range(node)]
    }

    pub fn successor_weights(&self, node: NodeId) -> &[f64] {
        &self.weights[self.arc_range(node)]
    }

    pub fn out_degree(&self, node: NodeId) -> usize {
        self.offsets[node + 1] - self.offsets[node]
    }

    pub fn arc_target(&self, arc: usize) -> NodeId {
        self.targets[arc]
    }

    /// Index of the arc `src -> dst`, if present.
    pub fn arc_index(&self, src: NodeId, dst: NodeId) -> Option<usize> {
        if src >= self.n_nodes() {
            return None;
        }
        let range = self.arc_range(src);
        self.targets[range.clone()].binary_search(&dst).ok().map(|i| range.start + i)
    }

    pub fn edge_weight(&self, src: NodeId, dst: NodeId) -> Option<f64> {
        self.arc_index(src, dst).map(|i| self.weights[i])
    }

    pub fn has_edge(&self, src: NodeId, dst: NodeId) -> bool {
        self.arc_index(src, dst).is_some()
    }

    /// All arcs as `(src, dst, weight)`, sorted by `(src, dst)`.
    pub fn arcs(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        (0..self.n_nodes()).flat_map(move |src| {
            self.arc_range(src).map(move |i| (src, self.targets[i], self.weights[i]))
        })
    }

    /// Each edge once: all arcs when directed, `src < dst` arcs otherwise.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        let directed = self.directed;
        self.arcs().filter(move |&(s, d, _)| directed || s < d)
    }

    /// Distinct neighbours of each node counting both arc directions.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg: Vec<usize> = (0..self.n_nodes()).map(|u| self.out_degree(u)).collect();
        if self.directed {
            for (src, dst, _) in self.arcs() {
                // A reciprocated pair is one neighbour, not two.
                if !self.has_edge(dst, src) {
                    deg[dst] += 1;
                }
            }
        }
        deg
    }
}

/// Accumulates co-occurrence arcs before freezing them into a [`WordGraph`].
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    n_nodes: usize,
    directed: bool,
    /// Arc contributions `(src, dst, seq, weight, add)`: `add` sums the
    /// weight in, otherwise the arc is set to weight 1. `seq` is the
    /// insertion order.
    log: Vec<(NodeId, NodeId, usize, f64, bool)>,
    next_seq: usize,
    compacted: usize,
}

impl GraphBuilder {
    pub fn new(n_nodes: usize, directed: bool) -> Self {
        GraphBuilder { n_nodes, directed, log: Vec::new(), next_seq: 0, compacted: 0 }
    }

    fn push_arc(&mut self, src: NodeId, dst: NodeId, weight: f64, add: bool) {
        self.log.push((src, dst, self.next_seq, weight, add));
        self.next_seq += 1;
    }

    fn push(&mut self, src: NodeId, dst: NodeId, weight: f64, add: bool) {
        self.push_arc(src, dst, weight, add);
        if !self.directed {
            self.push_arc(dst, src, weight, add);
        }
    }

    fn maybe_compact(&mut self) {
        if self.log.len() > 2 * self.compacted + 4096 {
            self.compact();
        }
    }

    /// Folds the log to one summed entry per arc, applying contributions to
    /// each arc in insertion order.
    fn compact(&mut self) {
        self.log.sort_unstable_by_key(|&(s, d, seq, _, _)| (s, d, seq));
        let mut kept = 0;
        for i in 0..self.log.len() {
            let (s, d, seq, w, add) = self.log[i];
            if kept > 0 && (self.log[kept - 1].0, self.log[kept - 1].1) == (s, d) {
                let last = &mut self.log[kept - 1];
                last.3 = if add { last.3 + w } else { 1.0 };
                last.2 = seq;
            } else {
                self.log[kept] = (s, d, seq, if add { w } else { 1.0 }, true);
                kept += 1;
            }
        }
        self.log.truncate(kept);
        self.compacted = kept;
    }

    /// Add the co-occurrence edges of one sentence given as node ids.
    pub fn add_sentence(&mut self, ids: &[NodeId], cfg: &GraphConfig) {
        let span = cfg.window.saturating_sub(1);
        self.log.reserve(ids.len() * span * if self.directed { 1 } else { 2 });
        for (i, &src) in ids.iter().enumerate() {
            for &dst in ids.iter().skip(i + 1).take(span) {
                if src != dst {
                    self.push(src, dst, 1.0, cfg.weighted);
                }
            }
        }
        self.maybe_compact();
    }

    /// Sum every arc of `graph` into this builder.
    pub fn add_graph(&mut self, graph: &WordGraph) {
        self.log.reserve(graph.arc_count());
        for (src, dst, w) in graph.arcs() {
            self.push_arc(src, dst, w, true);
        }
        self.maybe_compact();
    }

    pub fn finish(mut self) -> WordGraph {
        self.compact();
        WordGraph::from_sorted_arcs(self.n_nodes, self.directed, self.log.iter().map(|&(s, d, _, w, _)| (s, d, w)))
    }
}

/// Co-occurrence graph of a single sentence over the ids of `vocab`.
pub fn build_sentence_graph(
    tokens: &TokenSequence,
    vocab: &Vocabulary,
    cfg: &GraphConfig,
) -> Result<WordGraph, TextGraphError> {
    cfg.validate()?;
    let ids = vocab.ids(tokens)?;
    let mut builder = GraphBuilder::new(vocab.len(), cfg.directed);
    builder.add_sentence(&ids, cfg);
    Ok(builder.finish())
}

/// Union of graphs over one vocabulary; coincident edge weights are summed.
/// An empty slice gives an empty directed graph with no nodes.
pub fn merge_graphs(graphs: &[WordGraph]) -> Result<WordGraph, TextGraphError> {
    let Some(first) = graphs.first() else {
        return Ok(WordGraph::empty(0, true));
    };
    let mut builder = GraphBuilder::new(first.n_nodes(), first.is_directed());
    for g in graphs {
        if g.is_directed() != first.is_directed() {
            return Err(TextGraphError::MixedGraphKinds);
        }
        if g.n_nodes() != first.n_nodes() {
            return Err(TextGraphError::NodeCountMismatch(first.n_nodes(), g.n_nodes()));
        }
        builder.add_graph(g);
    }
    Ok(builder.finish())
}

/// Build the vocabulary over all sentence units and merge their graphs.
///
/// Equivalent to [`build_sentence_graph`] on every unit followed by
/// [`merge_graphs`], except that unweighted graphs keep weight 1 on edges
/// that several units share.
pub fn build_corpus_graph(
    sentences: &[TokenSequence],
    cfg: &GraphConfig,
) -> Result<(WordGraph, Vocabulary), TextGraphError> {
    cfg.validate()?;
    if sentences.iter().all(TokenSequence::is_empty) {
        return Err(TextGraphError::EmptyCorpus);
    }
    let vocab = Vocabulary::from_sequences(sentences);
    let mut builder = GraphBuilder::new(vocab.len(), cfg.directed);
    for sentence in sentences {
        builder.add_sentence(&vocab.ids(sentence)?, cfg);
    }
    Ok((builder.finish(), vocab))
}
