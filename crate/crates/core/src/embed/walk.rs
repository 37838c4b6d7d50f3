use alloc::vec::Vec;

use super::{AliasTable, EmbedError};
use crate::seed;
use crate::textgraph::{NodeId, WordGraph};

/// Random-walk hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams {
    /// Return parameter; small values make the walk backtrack.
    pub p: f64,
    /// In-out parameter; small values push the walk away from where it came from.
    pub q: f64,
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub seed: u64,
}

impl Default for WalkParams {
    fn default() -> Self {
        WalkParams { p: 0.25, q: 0.25, walk_length: 40, walks_per_node: 10, seed: 0 }
    }
}

impl WalkParams {
    pub fn validate(&self) -> Result<(), EmbedError> {
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(EmbedError::InvalidParams("p must be positive and finite"));
        }
        if !(self.q > 0.0 && self.q.is_finite()) {
            return Err(EmbedError::InvalidParams("q must be positive and finite"));
        }
        if self.walk_length < 2 {
            return Err(EmbedError::InvalidParams("walk length must be at least 2"));
        }
        if self.walks_per_node < 1 {
            return Err(EmbedError::InvalidParams("need at least one walk per node"));
        }
        Ok(())
    }
}

/// Search bias for a candidate whose shortest-path distance from the
/// previous node is `distance`.
pub fn alpha(p: f64, q: f64, distance: u32) -> Result<f64, EmbedError> {
    match distance {
        0 => Ok(1.0 / p),
        1 => Ok(1.0),
        2 => Ok(1.0 / q),
        d => Err(EmbedError::InvalidDistance(d)),
    }
}

fn distance_class(graph: &WordGraph, prev: NodeId, candidate: NodeId) -> u32 {
    if candidate == prev {
        0
    } else if graph.has_edge(prev, candidate) {
        1
    } else {
        2
    }
}

fn biased_weights(graph: &WordGraph, prev: NodeId, cur: NodeId, p: f64, q: f64) -> Vec<f64> {
    let inv_p = 1.0 / p;
    let inv_q = 1.0 / q;
    graph
        .successors(cur)
        .iter()
        .zip(graph.successor_weights(cur))
        .map(|(&x, &w)| {
            let bias = match distance_class(graph, prev, x) {
                0 => inv_p,
                1 => 1.0,
                _ => inv_q,
            };
            bias * w
        })
        .collect()
}

/// Normalized next-step distribution after traversing `prev -> cur`, as
/// `(successor, probability)` pairs in successor-id order.
pub fn transition_distribution(
    graph: &WordGraph,
    prev: NodeId,
    cur: NodeId,
    p: f64,
    q: f64,
) -> Result<Vec<(NodeId, f64)>, EmbedError> {
    if !graph.has_edge(prev, cur) {
        return Err(EmbedError::MissingEdge(prev, cur));
    }
    if graph.out_degree(cur) == 0 {
        return Err(EmbedError::DeadEnd(cur));
    }
    let weights = biased_weights(graph, prev, cur, p, q);
    let z: f64 = weights.iter().sum();
    Ok(graph.successors(cur).iter().zip(weights).map(|(&x, w)| (x, w / z)).collect())
}

/// Precomputed alias tables: one per node for the first step (weight
/// proportional) and one per arc `t -> v` for every later step.
#[derive(Debug, Clone)]
pub struct TransitionTables {
    first_step: Vec<Option<AliasTable>>,
    per_arc: Vec<Option<AliasTable>>,
}

impl TransitionTables {
    pub fn new(graph: &WordGraph, p: f64, q: f64) -> Self {
        let first_step = (0..graph.n_nodes())
            .map(|u| AliasTable::new(graph.successor_weights(u)))
            .collect();
        let mut per_arc = Vec::with_capacity(graph.arc_count());
        for t in 0..graph.n_nodes() {
            for &v in graph.successors(t) {
                per_arc.push(AliasTable::new(&biased_weights(graph, t, v, p, q)));
            }
        }
        TransitionTables { first_step, per_arc }
    }

    /// Stored distribution for the step after `prev -> cur`; `None` when
    /// the arc is absent or `cur` is a dead end.
    pub fn distribution(&self, graph: &WordGraph, prev: NodeId, cur: NodeId) -> Option<&[f64]> {
        let arc = graph.arc_index(prev, cur)?;
        self.per_arc[arc].as_ref().map(AliasTable::probabilities)
    }

    pub fn arc_table(&self, arc: usize) -> Option<&AliasTable> {
        self.per_arc[arc].as_ref()
    }

    pub fn first_step(&self, node: NodeId) -> Option<&AliasTable> {
        self.first_step[node].as_ref()
    }
}

/// Walks plus the per-node degrees used for the negative-sampling noise.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkCorpus {
    pub n_nodes: usize,
    pub walks: Vec<Vec<NodeId>>,
    pub degrees: Vec<usize>,
}

/// Walk number `index` starting at `start`. The generator is seeded from
/// `(params.seed, start, index)` alone, so walks can be produced in any
/// order or in parallel.
pub fn generate_walk(
    graph: &WordGraph,
    tables: &TransitionTables,
    params: &WalkParams,
    start: NodeId,
    index: usize,
) -> Vec<NodeId> {
    let mut rng = seed::rng_from(seed::derive(params.seed, &[start as u64, index as u64]));
    let mut walk = Vec::with_capacity(params.walk_length);
    walk.push(start);
    let Some(first) = tables.first_step(start) else {
        return walk;
    };
    let mut arc = graph.arc_range(start).start + first.sample(&mut rng);
    walk.push(graph.arc_target(arc));
    while walk.len() < params.walk_length {
        let Some(table) = tables.arc_table(arc) else {
            break;
        };
        let cur = graph.arc_target(arc);
        arc = graph.arc_range(cur).start + table.sample(&mut rng);
        walk.push(graph.arc_target(arc));
    }
    walk
}

/// `walks_per_node` walks from every node, ordered round by round.
///
/// Nodes without successors yield the single-node walk `[u]`; walks that
/// reach a dead end stop there.
pub fn generate_walks(graph: &WordGraph, params: &WalkParams) -> Result<WalkCorpus, EmbedError> {
    params.validate()?;
    if graph.n_nodes() == 0 {
        return Err(EmbedError::EmptyGraph);
    }
    let tables = TransitionTables::new(graph, params.p, params.q);
    let n = graph.n_nodes();
    let walks = (0..params.walks_per_node)
        .flat_map(|i| (0..n).map(move |u| (u, i)))
        .map(|(u, i)| generate_walk(graph, &tables, params, u, i))
        .collect();
    Ok(WalkCorpus { n_nodes: n, walks, degrees: graph.degrees() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn alpha_cases() {
        assert_eq!(alpha(1.0, 1.0, 0).unwrap(), 1.0);
        assert_eq!(alpha(1.0, 1.0, 2).unwrap(), 1.0);
        assert_eq!(alpha(0.5, 1.0, 0).unwrap(), 2.0);
        assert_eq!(alpha(1.0, 2.0, 2).unwrap(), 0.5);
        assert_eq!(alpha(3.0, 4.0, 1).unwrap(), 1.0);
        assert_eq!(alpha(1.0, 1.0, 3), Err(EmbedError::InvalidDistance(3)));
    }

    /// t=0, v=1, x1=2 (adjacent to t), x2=3 (not adjacent to t).
    fn fork(w_vt: f64) -> WordGraph {
        WordGraph::from_edges(
            4,
            true,
            [(0, 1, 1.0), (0, 2, 1.0), (1, 0, w_vt), (1, 2, 1.0), (1, 3, 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn single_successor_is_certain() {
        let g = WordGraph::from_edges(2, false, [(0, 1, 1.0)]).unwrap();
        assert_eq!(transition_distribution(&g, 0, 1, 0.3, 7.0).unwrap(), vec![(0, 1.0)]);
    }

    #[test]
    fn hand_evaluated_distributions() {
        let d = transition_distribution(&fork(1.0), 0, 1, 1.0, 0.5).unwrap();
        assert_eq!(d, vec![(0, 0.25), (2, 0.25), (3, 0.5)]);

        let d = transition_distribution(&fork(2.0), 0, 1, 2.0, 1.0).unwrap();
        for (_, m) in d {
            assert!((m - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn dead_end_and_missing_edge() {
        let g = WordGraph::from_edges(3, true, [(0, 1, 1.0)]).unwrap();
        assert_eq!(transition_distribution(&g, 0, 1, 1.0, 1.0), Err(EmbedError::DeadEnd(1)));
        assert_eq!(transition_distribution(&g, 1, 2, 1.0, 1.0), Err(EmbedError::MissingEdge(1, 2)));
    }

    #[test]
    fn directed_chain_is_forced() {
        let g = WordGraph::from_edges(3, true, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let params = WalkParams { walk_length: 3, walks_per_node: 1, ..WalkParams::default() };
        let corpus = generate_walks(&g, &params).unwrap();
        assert_eq!(corpus.walks, vec![vec![0, 1, 2], vec![1, 2], vec![2]]);
    }

    #[test]
    fn isolated_node_emits_itself() {
        let g = WordGraph::from_edges(3, false, [(0, 1, 1.0)]).unwrap();
        let params = WalkParams { walks_per_node: 2, walk_length: 5, ..WalkParams::default() };
        let corpus = generate_walks(&g, &params).unwrap();
        assert_eq!(corpus.walks.len(), 6);
        assert_eq!(corpus.walks.iter().filter(|w| w.as_slice() == [2]).count(), 2);
        assert!(corpus.walks.iter().filter(|w| w[0] != 2).all(|w| w.len() == 5));
    }

    #[test]
    fn invalid_params() {
        let g = WordGraph::from_edges(2, false, [(0, 1, 1.0)]).unwrap();
        for bad in [
            WalkParams { p: 0.0, ..WalkParams::default() },
            WalkParams { q: -1.0, ..WalkParams::default() },
            WalkParams { walk_length: 1, ..WalkParams::default() },
            WalkParams { walks_per_node: 0, ..WalkParams::default() },
        ] {
            assert!(matches!(generate_walks(&g, &bad), Err(EmbedError::InvalidParams(_))));
        }
        assert_eq!(generate_walks(&WordGraph::empty(0, true), &WalkParams::default()), Err(EmbedError::EmptyGraph));
    }

    #[test]
    fn walks_are_reproducible_and_order_independent() {
        let g = fork(2.0);
        let params = WalkParams { seed: 99, ..WalkParams::default() };
        let a = generate_walks(&g, &params).unwrap();
        let b = generate_walks(&g, &params).unwrap();
        assert_eq!(a, b);
        let tables = TransitionTables::new(&g, params.p, params.q);
        // Round 3, node 1 sits at index 3 * n + 1.
        assert_eq!(generate_walk(&g, &tables, &params, 1, 3), a.walks[3 * 4 + 1]);
    }
}
