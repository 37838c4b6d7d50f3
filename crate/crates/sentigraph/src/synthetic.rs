//! Synthetic corpora with a known answer.

use rand::seq::SliceRandom;
use rand::Rng;
use sentigraph_core::seed;

use crate::dataset::{LabeledCorpus, LabeledDocument};

/// Two-class corpus where each class owns a handful of indicative tokens
/// and everything else is shared filler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedPolarity {
    pub n_docs: usize,
    pub vocab_size: usize,
    pub indicative_per_class: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Indicative tokens planted per document, at least one.
    pub max_planted: usize,
    pub seed: u64,
}

impl Default for PlantedPolarity {
    fn default() -> Self {
        PlantedPolarity {
            n_docs: 2000,
            vocab_size: 200,
            indicative_per_class: 10,
            min_len: 8,
            max_len: 20,
            max_planted: 3,
            seed: 7,
        }
    }
}

impl PlantedPolarity {
    pub fn indicative_tokens(&self, class: usize) -> Vec<String> {
        let prefix = if class == 0 { "neg" } else { "pos" };
        (0..self.indicative_per_class).map(|i| format!("{prefix}{i}")).collect()
    }

    fn fillers(&self) -> Vec<String> {
        (0..self.vocab_size - 2 * self.indicative_per_class).map(|i| format!("w{i}")).collect()
    }

    /// Documents alternate between the classes.
    pub fn generate(&self) -> LabeledCorpus {
        assert!(self.vocab_size > 2 * self.indicative_per_class && self.indicative_per_class > 0);
        assert!(self.min_len >= self.max_planted && self.max_planted >= 1 && self.max_len >= self.min_len);
        let mut rng = seed::rng_from(self.seed);
        let fillers = self.fillers();
        let marked = [self.indicative_tokens(0), self.indicative_tokens(1)];
        let documents = (0..self.n_docs)
            .map(|i| {
                let label = i % 2;
                let len = rng.gen_range(self.min_len..=self.max_len);
                let planted = rng.gen_range(1..=self.max_planted);
                let mut words: Vec<&str> = (0..len - planted).map(|_| fillers.choose(&mut rng).unwrap().as_str()).collect();
                for _ in 0..planted {
                    let at = rng.gen_range(0..=words.len());
                    words.insert(at, marked[label].choose(&mut rng).unwrap());
                }
                LabeledDocument { doc_id: (i + 1).to_string(), label, text: words.join(" ") }
            })
            .collect();
        LabeledCorpus { class_names: vec!["negative".into(), "positive".into()], documents }
    }
}
