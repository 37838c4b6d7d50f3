use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use rand::{Rng, RngCore};

use super::{CnnHyperparams, ConvNetError, EncodedDoc};
use crate::embed::EmbeddingMatrix;
use crate::math::{axpy, dot, log_sum_exp};
use crate::seed;
use crate::textgraph::{TokenSequence, Vocabulary};

/// Every parameter tensor of the network, row-major.
///
/// Gradients use the same layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnParams {
    /// Embedding tables, `vocab x dims` each.
    pub channels: Vec<Vec<f64>>,
    /// Per width: `n_filters` filters of `width * dims` weights.
    pub filters: Vec<Vec<f64>>,
    /// Per width: `n_filters` biases.
    pub filter_bias: Vec<Vec<f64>>,
    /// `hidden_dim x pooled_len`.
    pub hidden_w: Vec<f64>,
    pub hidden_b: Vec<f64>,
    /// `n_classes x hidden_dim`.
    pub out_w: Vec<f64>,
    pub out_b: Vec<f64>,
}

impl CnnParams {
    pub fn zeros_like(other: &CnnParams) -> Self {
        let z = |v: &Vec<f64>| alloc::vec![0.0; v.len()];
        CnnParams {
            channels: other.channels.iter().map(z).collect(),
            filters: other.filters.iter().map(z).collect(),
            filter_bias: other.filter_bias.iter().map(z).collect(),
            hidden_w: z(&other.hidden_w),
            hidden_b: z(&other.hidden_b),
            out_w: z(&other.out_w),
            out_b: z(&other.out_b),
        }
    }

    /// All tensors in a fixed order: channels, filters, filter biases,
    /// hidden weights and bias, output weights and bias.
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        out.extend(self.channels.iter().map(Vec::as_slice));
        out.extend(self.filters.iter().map(Vec::as_slice));
        out.extend(self.filter_bias.iter().map(Vec::as_slice));
        out.extend([&self.hidden_w[..], &self.hidden_b, &self.out_w, &self.out_b]);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        out.extend(self.channels.iter_mut().map(Vec::as_mut_slice));
        out.extend(self.filters.iter_mut().map(Vec::as_mut_slice));
        out.extend(self.filter_bias.iter_mut().map(Vec::as_mut_slice));
        out.extend([
            &mut self.hidden_w[..],
            &mut self.hidden_b[..],
            &mut self.out_w[..],
            &mut self.out_b[..],
        ]);
        out
    }

    /// Names matching [`CnnParams::tensors`], given the filter widths.
    pub fn tensor_names(&self, widths: &[usize]) -> Vec<String> {
        let mut out = Vec::new();
        out.extend((0..self.channels.len()).map(|c| format!("embedding.{c}")));
        out.extend(widths.iter().map(|w| format!("conv{w}.weight")));
        out.extend(widths.iter().map(|w| format!("conv{w}.bias")));
        out.extend(["hidden.weight", "hidden.bias", "output.weight", "output.bias"].map(String::from));
        out
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }
}

/// Convolutional classifier plus its own copy of the embedding table(s).
#[derive(Debug, Clone, PartialEq)]
pub struct CnnModel {
    hyper: CnnHyperparams,
    vocab_size: usize,
    params: CnnParams,
}

/// Intermediate values of one forward pass, kept for backpropagation.
struct Trace {
    argmax: Vec<usize>,
    pooled: Vec<f64>,
    mask: Option<Vec<f64>>,
    dropped: Vec<f64>,
    hidden: Vec<f64>,
    probs: Vec<f64>,
    log_z: f64,
    logits: Vec<f64>,
}

fn uniform(rng: &mut seed::Rng, n: usize, bound: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-bound..bound)).collect()
}

impl CnnModel {
    /// Fresh model. Graph-initialized modes copy `init`; `rand` only uses
    /// its shape.
    pub fn new(hyper: CnnHyperparams, init: &EmbeddingMatrix, seed: u64) -> Result<Self, ConvNetError> {
        hyper.validate()?;
        if init.dims() != hyper.dims {
            return Err(ConvNetError::DimensionMismatch("embedding dims differ from hyperparams"));
        }
        let mut rng = seed::rng_from(seed);
        let d = hyper.dims;
        let vocab_size = init.n_nodes();
        let channels = if hyper.mode == super::EmbeddingMode::Rand {
            alloc::vec![uniform(&mut rng, vocab_size * d, 0.25)]
        } else {
            hyper.mode.channels().iter().map(|_| init.center_data().to_vec()).collect()
        };
        let mut filters = Vec::new();
        let mut filter_bias = Vec::new();
        for &w in &hyper.filter_widths {
            let fan_in = (w * d) as f64;
            filters.push(uniform(&mut rng, hyper.n_filters * w * d, libm::sqrt(1.0 / fan_in)));
            filter_bias.push(alloc::vec![0.0; hyper.n_filters]);
        }
        let pooled = hyper.pooled_len();
        let hidden_w = uniform(&mut rng, hyper.hidden_dim * pooled, libm::sqrt(1.0 / pooled as f64));
        let out_w =
            uniform(&mut rng, hyper.n_classes * hyper.hidden_dim, libm::sqrt(1.0 / hyper.hidden_dim as f64));
        let params = CnnParams {
            channels,
            filters,
            filter_bias,
            hidden_w,
            hidden_b: alloc::vec![0.0; hyper.hidden_dim],
            out_w,
            out_b: alloc::vec![0.0; hyper.n_classes],
        };
        Ok(CnnModel { hyper, vocab_size, params })
    }

    /// Reassemble a model from stored tensors, checking every shape.
    pub fn from_parts(hyper: CnnHyperparams, vocab_size: usize, params: CnnParams) -> Result<Self, ConvNetError> {
        use ConvNetError::DimensionMismatch as Bad;
        hyper.validate()?;
        let d = hyper.dims;
        if params.channels.len() != hyper.mode.channels().len() {
            return Err(Bad("channel count does not match mode"));
        }
        if params.channels.iter().any(|c| c.len() != vocab_size * d) {
            return Err(Bad("embedding channel shape"));
        }
        if params.filters.len() != hyper.filter_widths.len()
            || params.filter_bias.len() != hyper.filter_widths.len()
        {
            return Err(Bad("filter bank count"));
        }
        for ((w, f), b) in hyper.filter_widths.iter().zip(&params.filters).zip(&params.filter_bias) {
            if f.len() != hyper.n_filters * w * d || b.len() != hyper.n_filters {
                return Err(Bad("filter bank shape"));
            }
        }
        if params.hidden_w.len() != hyper.hidden_dim * hyper.pooled_len()
            || params.hidden_b.len() != hyper.hidden_dim
            || params.out_w.len() != hyper.n_classes * hyper.hidden_dim
            || params.out_b.len() != hyper.n_classes
        {
            return Err(Bad("dense layer shape"));
        }
        if !params.is_finite() {
            return Err(Bad("non-finite parameter"));
        }
        Ok(CnnModel { hyper, vocab_size, params })
    }

    pub fn hyper(&self) -> &CnnHyperparams {
        &self.hyper
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn params(&self) -> &CnnParams {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut CnnParams {
        &mut self.params
    }

    /// Trainability flags aligned with [`CnnParams::tensors`].
    pub fn trainable(&self) -> Vec<bool> {
        let mut out: Vec<bool> = self.hyper.mode.channels().to_vec();
        out.resize(self.params.tensors().len(), true);
        out
    }

    pub fn encode(&self, tokens: &TokenSequence, vocab: &Vocabulary) -> EncodedDoc {
        super::encode_document(tokens, vocab, self.hyper.max_len)
    }

    fn check_doc(&self, doc: &EncodedDoc) -> Result<(), ConvNetError> {
        let width = self.hyper.max_width();
        if width > doc.len() {
            return Err(ConvNetError::FilterTooWide { width, len: doc.len() });
        }
        if doc.ids.iter().flatten().any(|&id| id >= self.vocab_size) {
            return Err(ConvNetError::DimensionMismatch("token id outside the embedding table"));
        }
        Ok(())
    }

    fn trace<R: RngCore + ?Sized>(&self, doc: &EncodedDoc, rng: Option<&mut R>) -> Trace {
        let d = self.hyper.dims;
        let nf = self.hyper.n_filters;
        let rows: Vec<Vec<&[f64]>> = doc
            .ids
            .iter()
            .map(|id| match id {
                Some(id) => self.params.channels.iter().map(|c| &c[id * d..(id + 1) * d]).collect(),
                None => Vec::new(),
            })
            .collect();

        let mut pooled = Vec::with_capacity(self.hyper.pooled_len());
        let mut argmax = Vec::with_capacity(self.hyper.pooled_len());
        for (wi, &width) in self.hyper.filter_widths.iter().enumerate() {
            let positions = doc.len() - width + 1;
            for f in 0..nf {
                let w = &self.params.filters[wi][f * width * d..(f + 1) * width * d];
                let b = self.params.filter_bias[wi][f];
                let mut best = (f64::NEG_INFINITY, 0);
                for i in 0..positions {
                    let mut s = b;
                    for k in 0..width {
                        let wk = &w[k * d..(k + 1) * d];
                        for row in &rows[i + k] {
                            s += dot(wk, row);
                        }
                    }
                    let c = libm::tanh(s);
                    if c > best.0 {
                        best = (c, i);
                    }
                }
                pooled.push(best.0);
                argmax.push(best.1);
            }
        }

        let p = self.hyper.dropout;
        let mask = match rng {
            Some(rng) if p > 0.0 => {
                let keep = 1.0 / (1.0 - p);
                Some(pooled.iter().map(|_| if rng.gen::<f64>() < p { 0.0 } else { keep }).collect::<Vec<_>>())
            }
            _ => None,
        };
        let dropped: Vec<f64> = match &mask {
            Some(m) => pooled.iter().zip(m).map(|(x, m)| x * m).collect(),
            None => pooled.clone(),
        };

        let pl = pooled.len();
        let hidden: Vec<f64> = (0..self.hyper.hidden_dim)
            .map(|j| libm::tanh(self.params.hidden_b[j] + dot(&self.params.hidden_w[j * pl..(j + 1) * pl], &dropped)))
            .collect();
        let h = hidden.len();
        let logits: Vec<f64> = (0..self.hyper.n_classes)
            .map(|c| self.params.out_b[c] + dot(&self.params.out_w[c * h..(c + 1) * h], &hidden))
            .collect();
        let log_z = log_sum_exp(&logits);
        let probs = logits.iter().map(|l| libm::exp(l - log_z)).collect();
        Trace { argmax, pooled, mask, dropped, hidden, probs, log_z, logits }
    }

    /// Class probabilities without dropout.
    pub fn forward(&self, doc: &EncodedDoc) -> Result<Vec<f64>, ConvNetError> {
        self.check_doc(doc)?;
        Ok(self.trace::<dyn RngCore>(doc, None).probs)
    }

    /// Class probabilities with a dropout mask drawn from `rng`.
    pub fn forward_training(&self, doc: &EncodedDoc, rng: &mut dyn RngCore) -> Result<Vec<f64>, ConvNetError> {
        self.check_doc(doc)?;
        Ok(self.trace(doc, Some(rng)).probs)
    }

    /// Most probable class (lowest index on ties) and the probabilities.
    pub fn predict(&self, doc: &EncodedDoc) -> Result<(usize, Vec<f64>), ConvNetError> {
        let probs = self.forward(doc)?;
        let mut label = 0;
        for (c, &p) in probs.iter().enumerate() {
            if p > probs[label] {
                label = c;
            }
        }
        Ok((label, probs))
    }

    /// Mean cross-entropy over the batch and its gradient, no dropout.
    pub fn loss_and_grads(&self, batch: &[(&EncodedDoc, usize)]) -> Result<(f64, CnnParams), ConvNetError> {
        self.batch_grads(batch, None)
    }

    /// As [`CnnModel::loss_and_grads`] with dropout masks drawn from `rng`,
    /// one document at a time in batch order.
    pub fn loss_and_grads_with_dropout(
        &self,
        batch: &[(&EncodedDoc, usize)],
        rng: &mut dyn RngCore,
    ) -> Result<(f64, CnnParams), ConvNetError> {
        self.batch_grads(batch, Some(rng))
    }

    fn batch_grads(
        &self,
        batch: &[(&EncodedDoc, usize)],
        mut rng: Option<&mut dyn RngCore>,
    ) -> Result<(f64, CnnParams), ConvNetError> {
        if batch.is_empty() {
            return Err(ConvNetError::EmptyDataset);
        }
        for &(doc, label) in batch {
            if label >= self.hyper.n_classes {
                return Err(ConvNetError::LabelOutOfRange { label, n_classes: self.hyper.n_classes });
            }
            self.check_doc(doc)?;
        }
        let mut grads = CnnParams::zeros_like(&self.params);
        let scale = 1.0 / batch.len() as f64;
        let mut loss = 0.0;
        for &(doc, label) in batch {
            let trace = self.trace(doc, rng.as_deref_mut());
            loss += trace.log_z - trace.logits[label];
            self.backward(doc, label, &trace, scale, &mut grads);
        }
        Ok((loss * scale, grads))
    }

    fn backward(&self, doc: &EncodedDoc, label: usize, t: &Trace, scale: f64, g: &mut CnnParams) {
        let d = self.hyper.dims;
        let h = self.hyper.hidden_dim;
        let pl = t.pooled.len();
        let p = &self.params;

        let dlogits: Vec<f64> =
            t.probs.iter().enumerate().map(|(c, &pr)| scale * (pr - if c == label { 1.0 } else { 0.0 })).collect();
        let mut dhidden = alloc::vec![0.0; h];
        for (c, &dl) in dlogits.iter().enumerate() {
            axpy(&mut g.out_w[c * h..(c + 1) * h], dl, &t.hidden);
            g.out_b[c] += dl;
            axpy(&mut dhidden, dl, &p.out_w[c * h..(c + 1) * h]);
        }
        let mut ddropped = alloc::vec![0.0; pl];
        for j in 0..h {
            let dz = dhidden[j] * (1.0 - t.hidden[j] * t.hidden[j]);
            if dz == 0.0 {
                continue;
            }
            axpy(&mut g.hidden_w[j * pl..(j + 1) * pl], dz, &t.dropped);
            g.hidden_b[j] += dz;
            axpy(&mut ddropped, dz, &p.hidden_w[j * pl..(j + 1) * pl]);
        }
        if let Some(mask) = &t.mask {
            for (x, m) in ddropped.iter_mut().zip(mask) {
                *x *= m;
            }
        }

        let trainable = self.hyper.mode.channels();
        let nf = self.hyper.n_filters;
        for (wi, &width) in self.hyper.filter_widths.iter().enumerate() {
            for f in 0..nf {
                let unit = wi * nf + f;
                let c = t.pooled[unit];
                let ds = ddropped[unit] * (1.0 - c * c);
                if ds == 0.0 {
                    continue;
                }
                g.filter_bias[wi][f] += ds;
                let start = t.argmax[unit];
                let base = f * width * d;
                for k in 0..width {
                    let Some(id) = doc.ids[start + k] else { continue };
                    let wk = base + k * d..base + (k + 1) * d;
                    for (ch, table) in p.channels.iter().enumerate() {
                        axpy(&mut g.filters[wi][wk.clone()], ds, &table[id * d..(id + 1) * d]);
                        if trainable[ch] {
                            axpy(&mut g.channels[ch][id * d..(id + 1) * d], ds, &p.filters[wi][wk.clone()]);
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convnet::EmbeddingMode;
    use alloc::vec;

    fn tiny(mode: EmbeddingMode) -> CnnModel {
        let hyper = CnnHyperparams {
            max_len: 5,
            dims: 2,
            filter_widths: vec![2],
            n_filters: 2,
            dropout: 0.0,
            hidden_dim: 3,
            n_classes: 2,
            mode,
        };
        let emb = EmbeddingMatrix::from_center(3, 2, vec![0.5, -0.2, 0.1, 0.9, -0.7, 0.3]).unwrap();
        CnnModel::new(hyper, &emb, 1).unwrap()
    }

    fn doc(ids: &[usize], len: usize) -> EncodedDoc {
        let mut v: Vec<Option<usize>> = ids.iter().map(|&i| Some(i)).collect();
        v.resize(len, None);
        EncodedDoc { ids: v, true_length: ids.len() }
    }

    #[test]
    fn zero_weights_give_uniform_output() {
        let mut m = tiny(EmbeddingMode::Static);
        for t in m.params_mut().tensors_mut() {
            t.iter_mut().for_each(|x| *x = 0.0);
        }
        assert_eq!(m.forward(&doc(&[], 5)).unwrap(), vec![0.5, 0.5]);
        let (loss, _) = m.loss_and_grads(&[(&doc(&[0, 1], 5), 1)]).unwrap();
        assert!((loss - core::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(m.predict(&doc(&[0], 5)).unwrap().0, 0);
    }

    #[test]
    fn one_hot_output_has_zero_loss() {
        let mut m = tiny(EmbeddingMode::Static);
        m.params_mut().out_w.iter_mut().for_each(|x| *x = 0.0);
        m.params_mut().out_b.copy_from_slice(&[0.0, 1000.0]);
        let d = doc(&[2, 1, 0], 5);
        assert_eq!(m.forward(&d).unwrap(), vec![0.0, 1.0]);
        assert_eq!(m.loss_and_grads(&[(&d, 1)]).unwrap().0, 0.0);
        assert_eq!(m.predict(&d).unwrap().0, 1);
    }

    #[test]
    fn probabilities_sum_to_one() {
        for mode in EmbeddingMode::ALL {
            let m = tiny(mode);
            let p = m.forward(&doc(&[0, 2, 1, 1], 5)).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
    }

    #[test]
    fn errors() {
        let m = tiny(EmbeddingMode::Static);
        assert_eq!(
            m.loss_and_grads(&[(&doc(&[0], 5), 2)]).unwrap_err(),
            ConvNetError::LabelOutOfRange { label: 2, n_classes: 2 }
        );
        assert_eq!(m.loss_and_grads(&[]).unwrap_err(), ConvNetError::EmptyDataset);
        assert!(matches!(m.forward(&doc(&[7], 5)), Err(ConvNetError::DimensionMismatch(_))));
        assert!(matches!(m.forward(&doc(&[0], 1)), Err(ConvNetError::FilterTooWide { .. })));
    }

    #[test]
    fn channel_layout_follows_mode() {
        assert_eq!(tiny(EmbeddingMode::Multichannel).params().channels.len(), 2);
        assert_eq!(tiny(EmbeddingMode::Static).trainable()[0], false);
        assert_eq!(tiny(EmbeddingMode::Multichannel).trainable()[..2], [false, true]);
        let rand = tiny(EmbeddingMode::Rand);
        assert_ne!(rand.params().channels[0], vec![0.5, -0.2, 0.1, 0.9, -0.7, 0.3]);
    }

    #[test]
    fn from_parts_checks_shapes() {
        let m = tiny(EmbeddingMode::NonStatic);
        let again = CnnModel::from_parts(m.hyper().clone(), 3, m.params().clone()).unwrap();
        assert_eq!(again, m);
        let mut broken = m.params().clone();
        broken.out_b.push(0.0);
        assert!(CnnModel::from_parts(m.hyper().clone(), 3, broken).is_err());
        assert!(CnnModel::from_parts(m.hyper().clone(), 4, m.params().clone()).is_err());
    }
}
