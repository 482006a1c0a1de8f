use ndarray::{Array2, ArrayView2};

use crate::error::{Result, TskError};
use crate::scalar::Scalar;

fn check_shapes<T>(a: ArrayView2<'_, T>, b: ArrayView2<'_, T>, what: &str) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(TskError::ShapeMismatch {
            what: what.into(),
            detail: format!("{:?} vs {:?}", a.dim(), b.dim()),
        });
    }
    Ok(())
}

/// Mean squared error over all entries, with its gradient.
pub fn loss_mse<T: Scalar>(pred: ArrayView2<'_, T>, target: ArrayView2<'_, T>) -> Result<(T, Array2<T>)> {
    check_shapes(pred, target, "mse")?;
    if pred.is_empty() {
        return Ok((T::zero(), Array2::zeros(pred.dim())));
    }
    let count = T::from_usize(pred.len()).expect("size");
    let diff = &pred - &target;
    let loss = diff.iter().map(|&d| d * d).sum::<T>() / count;
    let grad = diff.mapv(|d| T::lit(2.0) * d / count);
    Ok((loss, grad))
}

/// Batch-mean of `-log softmax(scores)[label]`, with its gradient
/// `(softmax - onehot) / B`.
pub fn loss_softmax_ce<T: Scalar>(scores: ArrayView2<'_, T>, labels: &[usize]) -> Result<(T, Array2<T>)> {
    let (b, k) = scores.dim();
    if labels.len() != b {
        return Err(TskError::ShapeMismatch {
            what: "cross-entropy labels".into(),
            detail: format!("{} labels for {b} rows", labels.len()),
        });
    }
    if b == 0 {
        return Ok((T::zero(), Array2::zeros((0, k))));
    }
    let bf = T::from_usize(b).expect("size");
    let mut grad = Array2::zeros((b, k));
    let mut total = T::zero();
    for ((row, mut g), &label) in scores.rows().into_iter().zip(grad.rows_mut()).zip(labels) {
        if label >= k {
            return Err(TskError::LabelOutOfRange { label, n_classes: k });
        }
        let max = row.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
        let sum: T = row.iter().map(|&v| (v - max).exp()).sum();
        let log_sum = sum.ln();
        total = total + (max + log_sum - row[label]);
        for (gk, &v) in g.iter_mut().zip(row.iter()) {
            *gk = (v - max - log_sum).exp() / bf;
        }
        g[label] = g[label] - T::one() / bf;
    }
    Ok((total / bf, grad))
}

/// Uniform-contribution penalty `lambda * sum_r (mean_b W[b, r] - 1/R)^2`
/// over a batch of normalized firing levels.
pub fn ur_penalty<T: Scalar>(wbar: ArrayView2<'_, T>, lambda: T) -> Result<(T, Array2<T>)> {
    if !(lambda >= T::zero()) {
        return Err(TskError::invalid("ur_weight", format!("must be >= 0, got {lambda}")));
    }
    let (b, r) = wbar.dim();
    if b == 0 || r == 0 {
        return Ok((T::zero(), Array2::zeros((b, r))));
    }
    let bf = T::from_usize(b).expect("size");
    let target = T::one() / T::from_usize(r).expect("size");
    let dev: Vec<T> = wbar.columns().into_iter().map(|c| c.sum() / bf - target).collect();
    let value = lambda * dev.iter().map(|&d| d * d).sum::<T>();
    let grad = Array2::from_shape_fn((b, r), |(_, k)| T::lit(2.0) * lambda * dev[k] / bf);
    Ok((value, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn mse_analytic() {
        let (l, g) = loss_mse(array![[3.0]].view(), array![[1.0]].view()).unwrap();
        assert_eq!(l, 4.0);
        assert_eq!(g, array![[4.0]]);
        let p = array![[0.5, -1.0], [2.0, 0.0]];
        let (l, g) = loss_mse(p.view(), p.view()).unwrap();
        assert_eq!(l, 0.0);
        assert!(g.iter().all(|&v| v == 0.0));
        assert!(loss_mse(p.view(), array![[1.0]].view()).is_err());
    }

    #[test]
    fn ce_analytic() {
        let (l, _) = loss_softmax_ce(array![[0.3, 0.3, 0.3, 0.3]].view(), &[2]).unwrap();
        assert!((l - 4f64.ln()).abs() < 1e-12);
        assert!((l - 1.386294).abs() < 1e-6);
        let (l, _) = loss_softmax_ce(array![[50.0, 0.0]].view(), &[0]).unwrap();
        assert!(l < 1e-20);
        assert!(loss_softmax_ce(array![[0.0, 1.0]].view(), &[2]).is_err());
    }

    #[test]
    fn ce_gradient_rows_sum_to_zero() {
        let s: Array2<f64> = array![[1.0, -2.0, 0.5], [0.0, 0.0, 3.0]];
        let (_, g) = loss_softmax_ce(s.view(), &[0, 2]).unwrap();
        for row in g.rows() {
            assert!(row.sum().abs() < 1e-15);
        }
    }

    #[test]
    fn ur_analytic() {
        let (v, _) = ur_penalty(array![[0.25, 0.25, 0.25, 0.25]].view(), 3.0).unwrap();
        assert_eq!(v, 0.0);
        let (v, _) = ur_penalty(array![[0.75, 0.25]].view(), 1.0).unwrap();
        assert_eq!(v, 0.125);
        let (v, _) = ur_penalty(array![[1.0, 0.0], [0.5, 0.5]].view(), 1.0).unwrap();
        assert_eq!(v, 0.125);
        assert!(ur_penalty(array![[1.0]].view(), -1.0).is_err());
    }
}
