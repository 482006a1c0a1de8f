//! Seeded synthetic datasets used by the tests, the acceptance suite and
//! the command-line examples.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Two classes of 50 points each, uniform in discs of radius 0.1 around
/// `(0, 0)` (label 0) and `(10, 10)` (label 1).
pub fn two_blobs(seed: u64) -> (Array2<f64>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Array2::zeros((100, 2));
    let mut y = Vec::with_capacity(100);
    for i in 0..100 {
        let label = i / 50;
        let center = 10.0 * label as f64;
        let radius = 0.1 * rng.random::<f64>().sqrt();
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        x[[i, 0]] = center + radius * angle.cos();
        x[[i, 1]] = center + radius * angle.sin();
        y.push(label);
    }
    (x, y)
}

/// Standard deviation of each XOR blob.
pub const XOR_SPREAD: f64 = 0.25;

/// Four Gaussian blobs at `(+-1, +-1)`, 200 points each. Blobs on the main
/// diagonal are class 0, the off-diagonal ones class 1.
pub fn xor(seed: u64) -> (Array2<f64>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, XOR_SPREAD).expect("valid spread");
    let corners = [(1.0, 1.0, 0), (-1.0, -1.0, 0), (1.0, -1.0, 1), (-1.0, 1.0, 1)];
    let mut x = Array2::zeros((800, 2));
    let mut y = Vec::with_capacity(800);
    for (b, &(cx, cy, label)) in corners.iter().enumerate() {
        for i in 0..200 {
            let row = b * 200 + i;
            x[[row, 0]] = cx + noise.sample(&mut rng);
            x[[row, 1]] = cy + noise.sample(&mut rng);
            y.push(label);
        }
    }
    (x, y)
}

/// `n` points with `x` uniform on `[-1, 1]` and `y = 3x - 2` exactly.
pub fn linear_1d(seed: u64, n: usize) -> (Array2<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Array2::from_shape_fn((n, 1), |_| rng.random_range(-1.0..=1.0));
    let y = x.column(0).iter().map(|&v| 3.0 * v - 2.0).collect();
    (x, y)
}

/// `n_blobs` unit-variance Gaussian blobs in `dims` dimensions whose centers
/// are drawn from `N(0, center_spread^2)`; blob `b` has label `b % n_classes`.
pub fn high_dim_blobs(
    seed: u64,
    dims: usize,
    n_blobs: usize,
    per_blob: usize,
    center_spread: f64,
    n_classes: usize,
) -> (Array2<f64>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let centers = Array2::from_shape_fn((n_blobs, dims), |_| center_spread * unit.sample(&mut rng));
    let mut x = Array2::zeros((n_blobs * per_blob, dims));
    let mut y = Vec::with_capacity(n_blobs * per_blob);
    for b in 0..n_blobs {
        for i in 0..per_blob {
            let row = b * per_blob + i;
            for d in 0..dims {
                x[[row, d]] = centers[[b, d]] + unit.sample(&mut rng);
            }
            y.push(b % n_classes);
        }
    }
    (x, y)
}
