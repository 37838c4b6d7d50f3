//! Confusion matrices and per-class precision / recall / F1.
//!
//! Ratios with a zero denominator are reported as 0.

use alloc::vec::Vec;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("{preds} predictions but {golds} gold labels")]
    LengthMismatch { preds: usize, golds: usize },
    #[error("label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("need at least one class")]
    NoClasses,
}

/// `counts[gold][pred]`, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    n_classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(n_classes: usize) -> Self {
        ConfusionMatrix { n_classes, counts: alloc::vec![0; n_classes * n_classes] }
    }

    pub fn from_counts(n_classes: usize, counts: Vec<u64>) -> Option<Self> {
        (counts.len() == n_classes * n_classes).then_some(ConfusionMatrix { n_classes, counts })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn get(&self, gold: usize, pred: usize) -> u64 {
        self.counts[gold * self.n_classes + pred]
    }

    pub fn add(&mut self, gold: usize, pred: usize) {
        self.counts[gold * self.n_classes + pred] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes).map(|c| self.get(c, c)).sum()
    }

    /// One-vs-rest `(tp, fp, fn)` for `class`.
    pub fn one_vs_rest(&self, class: usize) -> (u64, u64, u64) {
        let tp = self.get(class, class);
        let predicted: u64 = (0..self.n_classes).map(|g| self.get(g, class)).sum();
        let actual: u64 = (0..self.n_classes).map(|p| self.get(class, p)).sum();
        (tp, predicted - tp, actual - tp)
    }
}

pub fn confusion(preds: &[usize], golds: &[usize], n_classes: usize) -> Result<ConfusionMatrix, EvalError> {
    if n_classes == 0 {
        return Err(EvalError::NoClasses);
    }
    if preds.len() != golds.len() {
        return Err(EvalError::LengthMismatch { preds: preds.len(), golds: golds.len() });
    }
    let mut cm = ConfusionMatrix::new(n_classes);
    for (&p, &g) in preds.iter().zip(golds) {
        for label in [p, g] {
            if label >= n_classes {
                return Err(EvalError::LabelOutOfRange { label, n_classes });
            }
        }
        cm.add(g, p);
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold examples of this class.
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub classes: Vec<ClassMetrics>,
    pub accuracy: f64,
    /// Unweighted mean of the per-class F1 scores.
    pub macro_f1: f64,
    pub total: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Mean of `num_i / den_i`, summed as an exact fraction and divided once
/// when it fits, so it is correctly rounded. Falls back to floating point.
fn mean_of_fractions(fracs: &[(u64, u64)]) -> f64 {
    let exact = fracs.iter().try_fold((0u128, 1u128), |(n, d), &(a, b)| {
        if b == 0 {
            return Some((n, d));
        }
        let (a, b) = (u128::from(a), u128::from(b));
        let num = n.checked_mul(b)?.checked_add(a.checked_mul(d)?)?;
        let den = d.checked_mul(b)?;
        let g = gcd(num, den).max(1);
        Some((num / g, den / g))
    });
    const EXACT: u128 = 1 << 53;
    if let Some((n, d)) = exact {
        let d = d * fracs.len() as u128;
        let g = gcd(n, d).max(1);
        let (n, d) = (n / g, d / g);
        if n <= EXACT && d <= EXACT {
            return n as f64 / d as f64;
        }
    }
    fracs.iter().map(|&(a, b)| ratio(a, b)).sum::<f64>() / fracs.len() as f64
}

/// Per-class one-vs-rest metrics, accuracy and macro-F1.
///
/// F1 is evaluated as `2tp / (2tp + fp + fn)`, the same quantity as the
/// harmonic mean of precision and recall with a single rounding.
pub fn metrics(cm: &ConfusionMatrix) -> Result<EvalReport, EvalError> {
    let total = cm.total();
    if total == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    let mut f1_fracs = Vec::with_capacity(cm.n_classes());
    let classes = (0..cm.n_classes())
        .map(|c| {
            let (tp, fp, fneg) = cm.one_vs_rest(c);
            f1_fracs.push((2 * tp, 2 * tp + fp + fneg));
            ClassMetrics {
                precision: ratio(tp, tp + fp),
                recall: ratio(tp, tp + fneg),
                f1: ratio(2 * tp, 2 * tp + fp + fneg),
                support: tp + fneg,
            }
        })
        .collect();
    Ok(EvalReport {
        classes,
        accuracy: ratio(cm.trace(), total),
        macro_f1: mean_of_fractions(&f1_fracs),
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn hand_tally() {
        let cm = confusion(&[1, 1, 0], &[1, 0, 0], 2).unwrap();
        assert_eq!((cm.get(1, 1), cm.get(0, 1), cm.get(0, 0), cm.get(1, 0)), (1, 1, 1, 0));
        let r = metrics(&cm).unwrap();
        assert_eq!(r.classes[1].precision, 0.5);
        assert_eq!(r.classes[1].recall, 1.0);
        assert_eq!(r.classes[1].f1, 2.0 / 3.0);
        assert_eq!(r.accuracy, 2.0 / 3.0);
    }

    #[test]
    fn diagonal_when_perfect() {
        let cm = confusion(&[0, 2, 1, 2], &[0, 2, 1, 2], 3).unwrap();
        assert_eq!(cm.trace(), cm.total());
        let r = metrics(&cm).unwrap();
        assert!(r.classes.iter().all(|c| c.f1 == 1.0));
        assert_eq!(r.macro_f1, 1.0);
    }

    #[test]
    fn accuracy_from_binary_counts() {
        // tp=85, tn=80, fp=15, fn=20 with class 1 as positive.
        let cm = ConfusionMatrix::from_counts(2, vec![80, 15, 20, 85]).unwrap();
        assert_eq!(metrics(&cm).unwrap().accuracy, 0.825);
    }

    #[test]
    fn empty_and_invalid() {
        let cm = confusion(&[], &[], 2).unwrap();
        assert_eq!(cm, ConfusionMatrix::new(2));
        assert_eq!(metrics(&cm), Err(EvalError::EmptyMatrix));
        assert_eq!(confusion(&[0], &[], 2), Err(EvalError::LengthMismatch { preds: 1, golds: 0 }));
        assert_eq!(confusion(&[2], &[0], 2), Err(EvalError::LabelOutOfRange { label: 2, n_classes: 2 }));
    }

    #[test]
    fn zero_over_zero_is_zero() {
        // Class 1 is never predicted nor present.
        let r = metrics(&confusion(&[0, 0], &[0, 0], 2).unwrap()).unwrap();
        assert_eq!(r.classes[1], ClassMetrics { precision: 0.0, recall: 0.0, f1: 0.0, support: 0 });
        assert_eq!(r.macro_f1, 0.5);
    }

    #[test]
    fn macro_f1_fallback_agrees() {
        let fracs = [(2 * 1_000_003, 2 * 1_000_003 + 17), (5, 9), (7, 11)];
        let exact = mean_of_fractions(&fracs);
        let float = fracs.iter().map(|&(a, b)| a as f64 / b as f64).sum::<f64>() / 3.0;
        assert!((exact - float).abs() < 1e-15);
    }
}
