use alloc::vec::Vec;
use rand::Rng;

/// Walker/Vose alias table: O(n) construction, O(1) sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct AliasTable {
    accept: Vec<f64>,
    alias: Vec<u32>,
    probs: Vec<f64>,
}

impl AliasTable {
    /// Returns `None` when `weights` is empty, has a negative or non-finite
    /// entry, or sums to zero.
    pub fn new(weights: &[f64]) -> Option<Self> {
        let n = weights.len();
        if n == 0 || weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return None;
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return None;
        }
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut scaled: Vec<f64> = probs.iter().map(|p| p * n as f64).collect();
        let mut accept = alloc::vec![1.0; n];
        let mut alias: Vec<u32> = (0..n as u32).collect();

        let (mut small, mut large): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| scaled[i] < 1.0);
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            accept[s] = scaled[s];
            alias[s] = l as u32;
            scaled[l] -= 1.0 - scaled[s];
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers are 1 up to rounding.
        for i in small.into_iter().chain(large) {
            accept[i] = 1.0;
        }
        Some(AliasTable { accept, alias, probs })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// The normalized distribution the table samples from.
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let i = rng.gen_range(0..self.accept.len());
        if rng.gen::<f64>() < self.accept[i] {
            i
        } else {
            self.alias[i] as usize
        }
    }

    /// Exact distribution implied by the accept/alias columns.
    pub fn implied_distribution(&self) -> Vec<f64> {
        let n = self.len() as f64;
        let mut out = alloc::vec![0.0; self.len()];
        for (i, (&a, &j)) in self.accept.iter().zip(&self.alias).enumerate() {
            out[i] += a / n;
            out[j as usize] += (1.0 - a) / n;
        }
        out
    }
}
