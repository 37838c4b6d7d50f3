use alloc::vec::Vec;

use super::CnnParams;

/// Adaptive moment estimation over a [`CnnParams`] layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: i32,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(learning_rate: f64, like: &CnnParams) -> Self {
        let zeros: Vec<Vec<f64>> = like.tensors().iter().map(|t| alloc::vec![0.0; t.len()]).collect();
        Adam { learning_rate, beta1: 0.9, beta2: 0.999, eps: 1e-8, step: 0, m: zeros.clone(), v: zeros }
    }

    /// Apply one update to every tensor flagged trainable.
    pub fn step(&mut self, params: &mut CnnParams, grads: &CnnParams, trainable: &[bool]) {
        self.step += 1;
        let bc1 = 1.0 - libm::pow(self.beta1, f64::from(self.step));
        let bc2 = 1.0 - libm::pow(self.beta2, f64::from(self.step));
        let lr = self.learning_rate * libm::sqrt(bc2) / bc1;
        let grads = grads.tensors();
        for (i, p) in params.tensors_mut().into_iter().enumerate() {
            if !trainable[i] {
                continue;
            }
            let (m, v, g) = (&mut self.m[i], &mut self.v[i], grads[i]);
            for j in 0..p.len() {
                m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * g[j];
                v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * g[j] * g[j];
                p[j] -= lr * m[j] / (libm::sqrt(v[j]) + self.eps);
            }
        }
    }
}
