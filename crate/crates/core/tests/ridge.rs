use ndarray::{Array2, Axis};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tsk_core::ridge::ridge_fit;

/// Solves `(A^T A + alpha I) B = A^T Y` by Gauss-Jordan elimination with
/// partial pivoting on the augmented normal equations.
fn elimination_solve(a: &Array2<f64>, y: &Array2<f64>, alpha: f64) -> Array2<f64> {
    let p = a.ncols();
    let k = y.ncols();
    let mut m = Array2::<f64>::zeros((p, p + k));
    for i in 0..p {
        for j in 0..p {
            m[[i, j]] = (0..a.nrows()).map(|n| a[[n, i]] * a[[n, j]]).sum::<f64>();
        }
        m[[i, i]] += alpha;
        for c in 0..k {
            m[[i, p + c]] = (0..a.nrows()).map(|n| a[[n, i]] * y[[n, c]]).sum::<f64>();
        }
    }
    for col in 0..p {
        let piv = (col..p)
            .max_by(|&r, &s| m[[r, col]].abs().total_cmp(&m[[s, col]].abs()))
            .unwrap();
        for j in 0..p + k {
            m.swap([col, j], [piv, j]);
        }
        let d = m[[col, col]];
        for j in 0..p + k {
            m[[col, j]] /= d;
        }
        for r in 0..p {
            if r != col {
                let f = m[[r, col]];
                for j in 0..p + k {
                    m[[r, j]] -= f * m[[col, j]];
                }
            }
        }
    }
    m.slice(ndarray::s![.., p..]).to_owned()
}

fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn random_system(rng: &mut ChaCha8Rng) -> (Array2<f64>, Array2<f64>, f64) {
    let p = rng.random_range(1..=20);
    let n = rng.random_range(p.max(2)..=50);
    let k = rng.random_range(1..=3);
    let a = Array2::from_shape_fn((n, p), |_| rng.random_range(-1.0..1.0));
    let y = Array2::from_shape_fn((n, k), |_| rng.random_range(-2.0..2.0));
    let alpha = if rng.random_bool(0.2) {
        0.0
    } else {
        rng.random_range(0.0..5.0)
    };
    (a, y, alpha)
}

#[test]
fn matches_elimination_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    for _ in 0..100 {
        let (a, y, alpha) = random_system(&mut rng);
        let sol = ridge_fit(a.view(), y.view(), alpha).unwrap();
        let oracle = elimination_solve(&a, &y, alpha);
        assert!(max_abs_diff(&sol.beta, &oracle) <= 1e-8);
    }
}

#[test]
fn twenty_by_six_example() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = Array2::from_shape_fn((20, 6), |_| rng.random_range(-1.0..1.0));
    let y = Array2::from_shape_fn((20, 1), |_| rng.random_range(-1.0..1.0));
    let sol = ridge_fit(a.view(), y.view(), 0.5).unwrap();
    assert!(max_abs_diff(&sol.beta, &elimination_solve(&a, &y, 0.5)) <= 1e-8);
    // normal-equation residual
    let mut lhs = a.t().dot(&a);
    lhs.diag_mut().mapv_inplace(|v| v + 0.5);
    let rhs = a.t().dot(&y);
    let resid = max_abs_diff(&lhs.dot(&sol.beta), &rhs);
    let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(resid <= 1e-8 * (1.0 + scale));
}

#[test]
fn identity_design_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for p in [1, 3, 10] {
        let y = Array2::from_shape_fn((p, 2), |_| rng.random_range(-10.0..10.0));
        for alpha in [0.0, 0.25, 1.0, 7.5] {
            let sol = ridge_fit(Array2::<f64>::eye(p).view(), y.view(), alpha).unwrap();
            let expect = y.mapv(|v| v / (1.0 + alpha));
            assert!(max_abs_diff(&sol.beta, &expect) <= 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn shrinkage_is_monotone(seed in any::<u64>(), a1 in 0.0f64..10.0, extra in 0.0f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, y, _) = random_system(&mut rng);
        let norm = |alpha| ridge_fit(a.view(), y.view(), alpha).unwrap().beta.iter().map(|b| b * b).sum::<f64>().sqrt();
        prop_assert!(norm(a1 + extra) <= norm(a1) + 1e-9);
    }

    #[test]
    fn row_order_does_not_matter(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, y, alpha) = random_system(&mut rng);
        let mut perm: Vec<usize> = (0..a.nrows()).collect();
        perm.shuffle(&mut rng);
        let b1 = ridge_fit(a.view(), y.view(), alpha).unwrap().beta;
        let b2 = ridge_fit(a.select(Axis(0), &perm).view(), y.select(Axis(0), &perm).view(), alpha).unwrap().beta;
        prop_assert!(max_abs_diff(&b1, &b2) <= 1e-8);
    }

    #[test]
    fn duplicated_targets_give_duplicated_columns(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, y, alpha) = random_system(&mut rng);
        let col = y.column(0).insert_axis(Axis(1));
        let y2 = ndarray::concatenate(Axis(1), &[col, col]).unwrap();
        let b = ridge_fit(a.view(), y2.view(), alpha).unwrap().beta;
        prop_assert_eq!(b.column(0), b.column(1));
    }
}
