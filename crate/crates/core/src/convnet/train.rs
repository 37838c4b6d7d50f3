use alloc::vec::Vec;
use rand::seq::SliceRandom;

use super::{Adam, CnnModel, ConvNetError, EncodedDoc};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { epochs: 10, learning_rate: 1e-3, batch_size: 32, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub train_loss: f64,
    pub valid_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    /// Snapshot with the best validation accuracy (earliest on ties), or
    /// the final model when there is no validation set.
    pub model: CnnModel,
    pub history: Vec<EpochStats>,
    pub best_epoch: usize,
}

pub fn accuracy(model: &CnnModel, data: &[(EncodedDoc, usize)]) -> Result<f64, ConvNetError> {
    if data.is_empty() {
        return Err(ConvNetError::EmptyDataset);
    }
    let mut correct = 0usize;
    for (doc, label) in data {
        if model.predict(doc)?.0 == *label {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}

/// Mini-batch Adam on mean cross-entropy with dropout. Batches are
/// reshuffled every epoch; everything random comes from `cfg.seed`.
pub fn train(
    mut model: CnnModel,
    train: &[(EncodedDoc, usize)],
    valid: &[(EncodedDoc, usize)],
    cfg: &TrainConfig,
) -> Result<TrainOutcome, ConvNetError> {
    if train.is_empty() {
        return Err(ConvNetError::EmptyDataset);
    }
    if cfg.batch_size == 0 || !(cfg.learning_rate >= 0.0) {
        return Err(ConvNetError::InvalidHyperparams("batch size must be positive and lr non-negative"));
    }
    let mut rng = seed::rng_from(cfg.seed);
    let mut adam = Adam::new(cfg.learning_rate, model.params());
    let trainable = model.trainable();
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, CnnModel)> = None;

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<(&EncodedDoc, usize)> = chunk.iter().map(|&i| (&train[i].0, train[i].1)).collect();
            let (loss, grads) = model.loss_and_grads_with_dropout(&batch, &mut rng)?;
            adam.step(model.params_mut(), &grads, &trainable);
            loss_sum += loss * batch.len() as f64;
        }
        let valid_accuracy = if valid.is_empty() { None } else { Some(accuracy(&model, valid)?) };
        if let Some(acc) = valid_accuracy {
            if best.as_ref().is_none_or(|(b, _, _)| acc > *b) {
                best = Some((acc, epoch, model.clone()));
            }
        }
        history.push(EpochStats { train_loss: loss_sum / train.len() as f64, valid_accuracy });
    }
    let (model, best_epoch) = match best {
        Some((_, epoch, snapshot)) => (snapshot, epoch),
        None => (model, cfg.epochs.saturating_sub(1)),
    };
    Ok(TrainOutcome { model, history, best_epoch })
}
