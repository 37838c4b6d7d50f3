use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sentigraph_core::textgraph::{
    build_corpus_graph, build_sentence_graph, merge_graphs, tokenize, GraphConfig, TokenSequence, Vocabulary,
    WordGraph,
};

fn seq(tokens: Vec<String>) -> TokenSequence {
    TokenSequence { doc_id: "s".into(), tokens }
}

/// Reference arc multiset: every position pair inside the window.
fn brute_force(ids: &[usize], cfg: &GraphConfig) -> BTreeMap<(usize, usize), f64> {
    let mut arcs = BTreeMap::new();
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            if j - i >= cfg.window || ids[i] == ids[j] {
                continue;
            }
            let mut keys = vec![(ids[i], ids[j])];
            if !cfg.directed {
                keys.push((ids[j], ids[i]));
            }
            for k in keys {
                let w = arcs.entry(k).or_insert(0.0);
                *w = if cfg.weighted { *w + 1.0 } else { 1.0 };
            }
        }
    }
    arcs
}

fn arcs_of(g: &WordGraph) -> BTreeMap<(usize, usize), f64> {
    g.arcs().map(|(s, d, w)| ((s, d), w)).collect()
}

#[test]
fn edge_count_formula_for_distinct_tokens() {
    for n in 0..=8usize {
        let tokens: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
        let s = seq(tokens);
        let vocab = Vocabulary::from_sequences([&s]);
        for window in 2..=5usize {
            let cfg = GraphConfig { window, directed: true, weighted: true };
            let g = build_sentence_graph(&s, &vocab, &cfg).unwrap();
            let expected: usize = (0..n).map(|i| (window - 1).min(n - 1 - i)).sum();
            assert_eq!(g.edge_count(), expected, "n={n} window={window}");
        }
    }
}

#[test]
fn thousand_synthetic_documents_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let docs: Vec<TokenSequence> = (0..1000)
        .map(|i| {
            let len = rng.gen_range(3..20);
            let tokens = (0..len).map(|_| format!("t{}", rng.gen_range(0..200))).collect();
            TokenSequence { doc_id: i.to_string(), tokens }
        })
        .collect();
    for &(directed, weighted) in &[(true, true), (false, true), (true, false), (false, false)] {
        let cfg = GraphConfig { window: 3, directed, weighted };
        let (g, vocab) = build_corpus_graph(&docs, &cfg).unwrap();
        assert_eq!(vocab.len(), 200);
        let mut want: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for d in &docs {
            for (k, w) in brute_force(&vocab.ids(d).unwrap(), &cfg) {
                let e = want.entry(k).or_insert(0.0);
                *e = if weighted { *e + w } else { 1.0 };
            }
        }
        assert_eq!(arcs_of(&g), want);
        assert!(g.arcs().all(|(_, _, w)| w >= 1.0));
    }
}

fn small_graph(directed: bool) -> impl Strategy<Value = WordGraph> {
    prop::collection::vec((0..6usize, 0..6usize, 1..4u32), 0..12).prop_map(move |edges| {
        WordGraph::from_edges(6, directed, edges.into_iter().filter(|(s, d, _)| s != d).map(|(s, d, w)| (s, d, f64::from(w))))
            .unwrap()
    })
}

proptest! {
    #[test]
    fn sentence_graph_matches_enumeration(ids in prop::collection::vec(0..5usize, 0..10), window in 2..6usize,
                                          directed: bool, weighted: bool) {
        let tokens: Vec<String> = ids.iter().map(|i| format!("w{i}")).collect();
        let vocab = Vocabulary::from_tokens((0..5).map(|i| format!("w{i}")).collect()).unwrap();
        let cfg = GraphConfig { window, directed, weighted };
        let g = build_sentence_graph(&seq(tokens), &vocab, &cfg).unwrap();
        prop_assert_eq!(arcs_of(&g), brute_force(&ids, &cfg));
        if !directed {
            for (u, v, w) in g.arcs() {
                prop_assert_eq!(g.edge_weight(v, u), Some(w));
            }
        }
        prop_assert!(g.arcs().all(|(u, v, w)| u != v && w > 0.0 && u < 5 && v < 5));
    }

    #[test]
    fn merge_is_commutative_and_associative(a in small_graph(true), b in small_graph(true), c in small_graph(true)) {
        let ab = merge_graphs(&[a.clone(), b.clone()]).unwrap();
        let ba = merge_graphs(&[b.clone(), a.clone()]).unwrap();
        prop_assert_eq!(&ab, &ba);
        let ab_c = merge_graphs(&[ab, c.clone()]).unwrap();
        let bc = merge_graphs(&[b, c]).unwrap();
        let a_bc = merge_graphs(&[a, bc]).unwrap();
        prop_assert_eq!(ab_c, a_bc);
    }

    #[test]
    fn undirected_merge_stays_symmetric(a in small_graph(false), b in small_graph(false)) {
        let m = merge_graphs(&[a, b]).unwrap();
        for (u, v, w) in m.arcs() {
            prop_assert_eq!(m.edge_weight(v, u), Some(w));
        }
    }

    #[test]
    fn tokenize_is_idempotent(text in "\\PC{0,60}") {
        let once = tokenize(&text, "a");
        let twice = tokenize(&once.tokens.join(" "), "a");
        prop_assert_eq!(&once.tokens, &twice.tokens);
        prop_assert!(once.tokens.iter().all(|t| !t.is_empty()));
    }
}
