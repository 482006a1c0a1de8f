//! Evaluation metrics shared by training and the command line.

use ndarray::ArrayView2;

use crate::scalar::Scalar;

/// Fraction of matching labels; `0` for empty input.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let hits = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len() as f64
}

/// Root mean squared error over every entry.
pub fn rmse<T: Scalar>(pred: ArrayView2<'_, T>, truth: ArrayView2<'_, T>) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let sse: f64 = pred
        .iter()
        .zip(truth.iter())
        .map(|(&p, &t)| (p.as_f64() - t.as_f64()).powi(2))
        .sum();
    (sse / truth.len() as f64).sqrt()
}

/// Coefficient of determination of a single output.
///
/// A constant target gives `1` for a perfect fit and `-inf` otherwise.
pub fn r_squared(pred: &[f64], truth: &[f64]) -> f64 {
    let n = truth.len() as f64;
    let mean = truth.iter().sum::<f64>() / n;
    let ss_res: f64 = pred.iter().zip(truth).map(|(p, t)| (t - p).powi(2)).sum();
    let ss_tot: f64 = truth.iter().map(|t| (t - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return if ss_res == 0.0 { 1.0 } else { f64::NEG_INFINITY };
    }
    1.0 - ss_res / ss_tot
}
