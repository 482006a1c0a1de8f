#![allow(dead_code)]

use ndarray::{Array1, Array2, Array3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tsk_core::{Antecedent, Consequent, FcmModel, FlTransform, InputTransform, Task, TriangularMf, TskModel};

#[derive(Clone, Copy, Debug)]
pub enum Kind {
    Gaussian,
    Triangular,
    Fcm,
}

pub const KINDS: [Kind; 3] = [Kind::Gaussian, Kind::Triangular, Kind::Fcm];

pub fn random_antecedent(rng: &mut ChaCha8Rng, kind: Kind, r: usize, d: usize, htsk: bool) -> Antecedent<f64> {
    match kind {
        Kind::Gaussian => {
            let centers = Array2::from_shape_fn((r, d), |_| rng.random_range(-2.0..2.0));
            let sigmas = Array2::from_shape_fn((r, d), |_| rng.random_range(0.05..3.0));
            Antecedent::gaussian(&centers, &sigmas, htsk).unwrap()
        }
        Kind::Triangular => {
            let mfs: Vec<_> = (0..r * d)
                .map(|_| {
                    let peak: f64 = rng.random_range(-1.0..1.0);
                    TriangularMf::new(
                        peak - rng.random_range(0.1..2.0),
                        peak,
                        peak + rng.random_range(0.1..2.0),
                    )
                    .unwrap()
                })
                .collect();
            Antecedent::triangular(Array2::from_shape_vec((r, d), mfs).unwrap(), htsk).unwrap()
        }
        Kind::Fcm => {
            let centers = Array2::from_shape_fn((r, d), |_| rng.random_range(-2.0..2.0));
            Antecedent::fcm(FcmModel::new(centers, rng.random_range(1.1..3.0)).unwrap()).unwrap()
        }
    }
}

pub fn random_chain(rng: &mut ChaCha8Rng, r: usize) -> Vec<FlTransform<f64>> {
    let mut chain = Vec::new();
    for _ in 0..rng.random_range(0..=3) {
        chain.push(match rng.random_range(0..3) {
            0 => FlTransform::rule_weights(Array1::from_shape_fn(r, |_| rng.random_range(0.1..3.0))).unwrap(),
            1 => FlTransform::drop_rule(rng.random_range(0.0..0.9)).unwrap(),
            _ => FlTransform::Renormalize,
        });
    }
    chain
}

pub fn random_model(rng: &mut ChaCha8Rng, kind: Kind, r: usize, d: usize, task: Task) -> TskModel<f64> {
    let htsk = rng.random_bool(0.5);
    let ant = random_antecedent(rng, kind, r, d, htsk);
    let out = match task {
        Task::Classification => rng.random_range(2..=4),
        Task::Regression => rng.random_range(1..=3),
    };
    let coeffs = Array3::from_shape_fn((r, out, d + 1), |_| rng.random_range(-3.0..3.0));
    let input_tf = if rng.random_bool(0.5) {
        InputTransform::standardize(
            Array1::from_shape_fn(d, |_| rng.random_range(-1.0..1.0)),
            Array1::from_shape_fn(d, |_| rng.random_range(0.1..4.0)),
        )
        .unwrap()
    } else {
        InputTransform::Identity
    };
    let chain = random_chain(rng, r);
    TskModel::new(ant, chain, input_tf, Consequent::new(coeffs).unwrap(), task).unwrap()
}

pub fn random_input(rng: &mut ChaCha8Rng, d: usize) -> Array1<f64> {
    Array1::from_shape_fn(d, |_| rng.random_range(-3.0..3.0))
}
