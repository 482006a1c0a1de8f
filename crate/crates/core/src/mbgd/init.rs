use ndarray::{Array1, Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, TskError};
use crate::fcm::{check_finite, seed_centers};
use crate::membership::{Antecedent, SIGMA_FLOOR};
use crate::model::{Consequent, InputTransform, Targets, TskModel};
use crate::scalar::Scalar;

const MAX_LLOYD_ITERS: usize = 100;

/// Gaussian antecedent centered on k-means clusters, every width set to the
/// feature's standard deviation.
pub fn init_antecedent_kmeans<T: Scalar>(x: ArrayView2<'_, T>, n_rules: usize, seed: u64) -> Result<Antecedent<T>> {
    let (n, d) = x.dim();
    if n_rules == 0 {
        return Err(TskError::invalid("n_rules", "must be at least 1"));
    }
    if n < n_rules {
        return Err(TskError::TooFewSamples { n_samples: n, n_rules });
    }
    check_finite(x, "data")?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = seed_centers(x, n_rules, &mut rng);
    let mut assign = vec![usize::MAX; n];
    for _ in 0..MAX_LLOYD_ITERS {
        let mut changed = false;
        for (i, xi) in x.rows().into_iter().enumerate() {
            let mut best = 0;
            let mut best_d = T::infinity();
            for (k, c) in centers.rows().into_iter().enumerate() {
                let dist: T = c.iter().zip(xi.iter()).map(|(&a, &b)| (a - b) * (a - b)).sum();
                if dist < best_d {
                    best_d = dist;
                    best = k;
                }
            }
            if assign[i] != best {
                assign[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = Array2::<T>::zeros((n_rules, d));
        let mut counts = vec![0usize; n_rules];
        for (xi, &k) in x.rows().into_iter().zip(&assign) {
            sums.row_mut(k).zip_mut_with(&xi, |s, &v| *s = *s + v);
            counts[k] += 1;
        }
        for (k, &cnt) in counts.iter().enumerate() {
            if cnt > 0 {
                let c = T::from_usize(cnt).expect("count");
                centers.row_mut(k).assign(&sums.row(k).mapv(|s| s / c));
            }
        }
    }

    let nf = T::from_usize(n).expect("row count");
    let std: Array1<T> = x
        .columns()
        .into_iter()
        .map(|col| {
            let m = col.sum() / nf;
            let v = col.iter().map(|&v| (v - m) * (v - m)).sum::<T>() / nf;
            v.sqrt().max(T::lit(SIGMA_FLOOR))
        })
        .collect();
    let sigmas = Array2::from_shape_fn((n_rules, d), |(_, j)| std[j]);
    Antecedent::gaussian(&centers, &sigmas, false)
}

/// Untrained model for gradient descent: k-means antecedent on the raw
/// features, standardized consequent inputs and an all-zero consequent.
pub fn init_mbgd_model<T: Scalar>(
    x: ArrayView2<'_, T>,
    targets: &Targets<T>,
    n_rules: usize,
    htsk: bool,
    seed: u64,
) -> Result<TskModel<T>> {
    if targets.len() != x.nrows() {
        return Err(TskError::ShapeMismatch {
            what: "targets".into(),
            detail: format!("{} targets for {} samples", targets.len(), x.nrows()),
        });
    }
    let mut antecedent = init_antecedent_kmeans(x, n_rules, seed)?;
    antecedent.htsk = htsk;
    TskModel::new(
        antecedent,
        Vec::new(),
        InputTransform::fit_standardize(x)?,
        Consequent::zeros(n_rules, targets.out_dim(), x.ncols()),
        targets.task(),
    )
}
