use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sentigraph_core::embed::{
    generate_walks, negative_sampling_loss, train_embeddings, transition_distribution, AliasTable, EmbedConfig,
    EmbeddingMatrix, TransitionTables, WalkParams,
};
use sentigraph_core::WordGraph;

fn random_graph(rng: &mut ChaCha8Rng, n: usize, directed: bool) -> WordGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && (directed || u < v) && rng.gen_bool(0.4) {
                edges.push((u, v, f64::from(rng.gen_range(1..5u32))));
            }
        }
    }
    WordGraph::from_edges(n, directed, edges).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transition_distributions_are_normalized(seed in any::<u64>(), directed: bool,
                                               p in 0.1f64..5.0, q in 0.1f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, 6, directed);
        let tables = TransitionTables::new(&g, p, q);
        for (t, v, _) in g.arcs() {
            match transition_distribution(&g, t, v, p, q) {
                Ok(dist) => {
                    let total: f64 = dist.iter().map(|(_, m)| m).sum();
                    prop_assert!((total - 1.0).abs() < 1e-9);
                    prop_assert!(dist.iter().all(|&(_, m)| m > 0.0));
                    let support: Vec<usize> = dist.iter().map(|&(x, _)| x).collect();
                    prop_assert_eq!(support.as_slice(), g.successors(v));
                    let stored = tables.distribution(&g, t, v).unwrap();
                    for (a, (_, b)) in stored.iter().zip(&dist) {
                        prop_assert!((a - b).abs() < 1e-12);
                    }
                }
                Err(_) => prop_assert_eq!(g.out_degree(v), 0),
            }
        }
    }

    #[test]
    fn every_walk_is_a_path(seed in any::<u64>(), directed: bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, 7, directed);
        let params = WalkParams { walk_length: 12, walks_per_node: 3, seed, ..WalkParams::default() };
        let corpus = generate_walks(&g, &params).unwrap();
        prop_assert_eq!(corpus.walks.len(), 7 * 3);
        for w in &corpus.walks {
            prop_assert!(w.len() <= 12);
            for pair in w.windows(2) {
                prop_assert!(g.has_edge(pair[0], pair[1]));
            }
            if w.len() < 12 {
                prop_assert_eq!(g.out_degree(*w.last().unwrap()), 0);
            }
        }
    }

    #[test]
    fn loss_ignores_negative_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let emb = random_matrix(&mut rng, 6, 5);
        let mut negs: Vec<usize> = (0..5).map(|_| rng.gen_range(0..6)).collect();
        let (a, _) = negative_sampling_loss(0, 1, &negs, &emb);
        negs.reverse();
        negs.rotate_left(2);
        let (b, _) = negative_sampling_loss(0, 1, &negs, &emb);
        prop_assert!((a - b).abs() < 1e-12);
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize) -> EmbeddingMatrix {
    let mut emb = EmbeddingMatrix::from_center(n, d, (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    for v in emb.context_data_mut() {
        *v = rng.gen_range(-1.0..1.0);
    }
    emb
}

#[test]
fn unbiased_walk_is_first_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for directed in [true, false] {
        let g = random_graph(&mut rng, 8, directed);
        for (t, v, _) in g.arcs() {
            let Ok(dist) = transition_distribution(&g, t, v, 1.0, 1.0) else { continue };
            let z: f64 = g.successor_weights(v).iter().sum();
            for ((x, m), (&y, &w)) in dist.iter().zip(g.successors(v).iter().zip(g.successor_weights(v))) {
                assert_eq!(*x, y);
                assert!((m - w / z).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn alias_sampler_matches_every_stored_distribution() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = random_graph(&mut rng, 5, true);
    let tables = TransitionTables::new(&g, 0.5, 2.0);
    for (t, v, _) in g.arcs() {
        let Some(probs) = tables.distribution(&g, t, v) else { continue };
        let table = AliasTable::new(probs).unwrap();
        let mut counts = vec![0usize; probs.len()];
        for _ in 0..100_000 {
            counts[table.sample(&mut rng)] += 1;
        }
        let tv: f64 = counts.iter().zip(probs).map(|(&c, p)| (c as f64 / 1e5 - p).abs()).sum::<f64>() / 2.0;
        assert!(tv < 0.01, "({t},{v}) tv={tv}");
    }
}

#[test]
fn loss_matches_independent_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..50 {
        let emb = random_matrix(&mut rng, 3, 4);
        let negs = [rng.gen_range(0..3), rng.gen_range(0..3)];
        let (loss, _) = negative_sampling_loss(0, 1, &negs, &emb);
        let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
        let score = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut want = -sig(score(emb.row(0), emb.context_row(1))).ln();
        for &n in &negs {
            want -= sig(-score(emb.row(0), emb.context_row(n))).ln();
        }
        assert!((loss - want).abs() < 1e-10);
    }
}

#[test]
fn negative_sampling_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let h = 1e-6;
    for _ in 0..20 {
        let emb = random_matrix(&mut rng, 5, 3);
        let negs = [2, 3, 2];
        let (_, grad) = negative_sampling_loss(0, 1, &negs, &emb);
        let mut dense_ctx = vec![0.0; 15];
        for (node, g) in &grad.context {
            for k in 0..3 {
                dense_ctx[node * 3 + k] += g[k];
            }
        }
        for k in 0..3 {
            let mut plus = emb.clone();
            plus.row_mut(0)[k] += h;
            let mut minus = emb.clone();
            minus.row_mut(0)[k] -= h;
            let num = (negative_sampling_loss(0, 1, &negs, &plus).0 - negative_sampling_loss(0, 1, &negs, &minus).0) / (2.0 * h);
            assert!((num - grad.center.1[k]).abs() <= 1e-5 * num.abs().max(1e-3));
        }
        for i in 0..15 {
            let mut plus = emb.clone();
            plus.context_data_mut()[i] += h;
            let mut minus = emb.clone();
            minus.context_data_mut()[i] -= h;
            let num = (negative_sampling_loss(0, 1, &negs, &plus).0 - negative_sampling_loss(0, 1, &negs, &minus).0) / (2.0 * h);
            assert!((num - dense_ctx[i]).abs() <= 1e-5 * num.abs().max(1e-3), "ctx {i}: {num} vs {}", dense_ctx[i]);
        }
    }
}

/// Two 6-cliques joined by the bridge 5-6.
pub fn barbell() -> WordGraph {
    let mut edges = Vec::new();
    for block in [0usize, 6] {
        for u in block..block + 6 {
            for v in u + 1..block + 6 {
                edges.push((u, v, 1.0));
            }
        }
    }
    edges.push((5, 6, 1.0));
    WordGraph::from_edges(12, false, edges).unwrap()
}

/// Co-occurrence graph of 400 random documents over 200 tokens.
fn fixture_graph() -> WordGraph {
    use sentigraph_core::textgraph::{build_corpus_graph, GraphConfig, TokenSequence};
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let docs: Vec<TokenSequence> = (0..400)
        .map(|i| {
            let topic = rng.gen_range(0..4) * 50;
            let tokens = (0..rng.gen_range(5..15)).map(|_| format!("t{}", topic + rng.gen_range(0..50))).collect();
            TokenSequence { doc_id: i.to_string(), tokens }
        })
        .collect();
    build_corpus_graph(&docs, &GraphConfig::default()).unwrap().0
}

#[test]
fn embedding_loss_decreases_and_is_deterministic() {
    let g = fixture_graph();
    let walks = generate_walks(&g, &WalkParams { seed: 5, ..WalkParams::default() }).unwrap();
    let cfg = EmbedConfig { seed: 2, ..EmbedConfig::default() };
    let run = train_embeddings(&walks, &cfg).unwrap();
    println!("epoch losses {:?}", run.epoch_loss);
    for pair in run.epoch_loss.windows(2).take(3) {
        assert!(pair[1] <= pair[0], "{:?}", run.epoch_loss);
    }
    assert!(*run.epoch_loss.last().unwrap() < run.initial_loss);
    assert_eq!(train_embeddings(&walks, &cfg).unwrap(), run);
}

#[test]
fn barbell_cliques_separate() {
    let g = barbell();
    let walks = generate_walks(&g, &WalkParams { seed: 1, ..WalkParams::default() }).unwrap();
    let emb = train_embeddings(&walks, &EmbedConfig { dims: 8, seed: 1, ..EmbedConfig::default() }).unwrap().embeddings;
    let (mut within, mut nw, mut cross, mut nc) = (0.0, 0, 0.0, 0);
    for u in 0..12 {
        for v in u + 1..12 {
            if (u < 6) == (v < 6) {
                within += emb.cosine(u, v);
                nw += 1;
            } else {
                cross += emb.cosine(u, v);
                nc += 1;
            }
        }
    }
    let (within, cross) = (within / nw as f64, cross / nc as f64);
    println!("within {within} cross {cross}");
    assert!(within - cross >= 0.2);
}
