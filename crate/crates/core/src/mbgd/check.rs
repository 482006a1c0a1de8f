//! Finite-difference verification of [`super::backward`].

use ndarray::{Array1, Array2, Array3, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::grad::{backward_masked, batch_loss_masked, sample_batch_masks};
use super::{LossKind, Optimizer, TrainConfig};
use crate::error::Result;
use crate::membership::{Antecedent, FlTransform, TriangularMf};
use crate::model::{Consequent, InputTransform, Targets, Task, TskModel};
use crate::scalar::{DoubleDouble, Scalar};

/// Largest `|g_a - g_n| / (|g_a| + |g_n| + 1e-8)` over every trainable
/// scalar, with central differences of step `fd_step`. DropRule masks are
/// drawn once from `cfg.seed` and held fixed for both gradients.
pub fn grad_check<T: Scalar>(
    model: &TskModel<T>,
    x: ArrayView2<'_, T>,
    targets: &Targets<T>,
    cfg: &TrainConfig<T>,
    fd_step: T,
) -> Result<T> {
    let err = grad_check_with::<T, T>(model, x, targets, cfg, fd_step.as_f64())?;
    Ok(T::lit(err))
}

/// As [`grad_check`], but the finite differences are taken on the loss
/// evaluated in the scalar type `U` while the analytic gradient stays in
/// `T`. With `U` wider than `T` the reference gradient is free of the
/// cancellation noise that otherwise swamps gradients near zero.
pub fn grad_check_with<T: Scalar, U: Scalar>(
    model: &TskModel<T>,
    x: ArrayView2<'_, T>,
    targets: &Targets<T>,
    cfg: &TrainConfig<T>,
    fd_step: f64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let masks = sample_batch_masks(model, x.nrows(), &mut rng);
    let analytic = backward_masked(model, x, targets, cfg, &masks)?.grads.flatten();

    let mut probe: TskModel<U> = model.cast()?;
    let xu = x.mapv(|v| U::lit(v.as_f64()));
    let tu: Targets<U> = targets.cast();
    let cu: TrainConfig<U> = cfg.cast();
    let params = probe.trainable_params(cfg.train_antecedent);
    let mut theta = params.clone();
    let h = U::lit(fd_step);
    let mut worst = 0.0f64;
    for (i, &g_a) in analytic.iter().enumerate() {
        let up = params[i] + h;
        let down = params[i] - h;
        theta[i] = up;
        probe.set_trainable_params(&theta, cfg.train_antecedent, false)?;
        let l_up = batch_loss_masked(&probe, xu.view(), &tu, &cu, &masks)?.total;
        theta[i] = down;
        probe.set_trainable_params(&theta, cfg.train_antecedent, false)?;
        let l_down = batch_loss_masked(&probe, xu.view(), &tu, &cu, &masks)?.total;
        theta[i] = params[i];
        let g_n = ((l_up - l_down) / (up - down)).as_f64();
        let g_a = g_a.as_f64();
        let rel = (g_a - g_n).abs() / (g_a.abs() + g_n.abs() + 1e-8);
        worst = worst.max(rel);
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AntecedentFamily {
    Gaussian,
    Triangular,
}

/// One randomized configuration of the gradient-check grid.
#[derive(Clone, Debug)]
pub struct GradCheckCase {
    pub family: AntecedentFamily,
    pub htsk: bool,
    pub loss: LossKind,
    pub ur_weight: f64,
    pub n_rules: usize,
    pub n_dims: usize,
    pub batch: usize,
    pub max_rel_error: f64,
}

impl std::fmt::Display for GradCheckCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let loss = match self.loss {
            LossKind::Mse => "mse",
            LossKind::SoftmaxCrossEntropy => "ce",
        };
        let family = match self.family {
            AntecedentFamily::Gaussian => "gaussian",
            AntecedentFamily::Triangular => "triangular",
        };
        write!(
            f,
            "{family:<10} htsk={:<5} loss={loss:<3} ur={:<3} R={} D={} B={} max_rel_err={:.3e}",
            self.htsk, self.ur_weight, self.n_rules, self.n_dims, self.batch, self.max_rel_error
        )
    }
}

/// Kink clearance for triangular cases, far above any finite-difference step.
const KINK_MARGIN: f64 = 1e-3;

/// Model, batch inputs, batch targets and config.
pub type GradCheckProblem = (TskModel<f64>, Array2<f64>, Targets<f64>, TrainConfig<f64>);

/// Builds a random small model, batch and config for one grid point.
pub fn random_case(
    rng: &mut ChaCha8Rng,
    family: AntecedentFamily,
    htsk: bool,
    loss: LossKind,
    ur_weight: f64,
) -> Result<GradCheckProblem> {
    let r = rng.random_range(1..=4);
    let d = rng.random_range(1..=5);
    let b = rng.random_range(1..=8);
    let (task, out_dim) = match loss {
        LossKind::Mse => (Task::Regression, rng.random_range(1..=2)),
        LossKind::SoftmaxCrossEntropy => (Task::Classification, rng.random_range(2..=3)),
    };

    let (antecedent, x) = match family {
        AntecedentFamily::Gaussian => {
            let centers = Array2::from_shape_fn((r, d), |_| rng.random_range(-1.0..1.0));
            let sigmas = Array2::from_shape_fn((r, d), |_| rng.random_range(0.5..1.5));
            let x = Array2::from_shape_fn((b, d), |_| rng.random_range(-1.5..1.5));
            (Antecedent::gaussian(&centers, &sigmas, htsk)?, x)
        }
        AntecedentFamily::Triangular => {
            let mut mfs = Vec::with_capacity(r * d);
            for _ in 0..r * d {
                let peak: f64 = rng.random_range(-0.5..0.5);
                let left = peak - rng.random_range(1.0..2.0);
                let right = peak + rng.random_range(1.0..2.0);
                mfs.push(TriangularMf::new(left, peak, right)?);
            }
            let grid = Array2::from_shape_vec((r, d), mfs).expect("R x D");
            let mut x = Array2::zeros((b, d));
            for ((_, j), v) in x.indexed_iter_mut() {
                *v = loop {
                    let cand: f64 = rng.random_range(-1.0..1.0);
                    let clear = grid.column(j).iter().all(|mf| {
                        [mf.left(), mf.peak(), mf.right()]
                            .iter()
                            .all(|k| (cand - k).abs() > KINK_MARGIN)
                    });
                    if clear {
                        break cand;
                    }
                };
            }
            (Antecedent::triangular(grid, htsk)?, x)
        }
    };

    let coeffs = Array3::from_shape_fn((r, out_dim, d + 1), |_| rng.random_range(-1.0..1.0));
    let mut chain = Vec::new();
    if rng.random_bool(0.5) {
        chain.push(FlTransform::rule_weights(Array1::from_shape_fn(r, |_| {
            rng.random_range(0.2..2.0)
        }))?);
    }
    if rng.random_bool(0.3) {
        chain.push(FlTransform::drop_rule(0.3)?);
    }
    if rng.random_bool(0.3) {
        chain.push(FlTransform::Renormalize);
    }
    let input_tf = if rng.random_bool(0.5) {
        InputTransform::standardize(
            Array1::from_shape_fn(d, |_| rng.random_range(-0.5..0.5)),
            Array1::from_shape_fn(d, |_| rng.random_range(0.5..2.0)),
        )?
    } else {
        InputTransform::Identity
    };
    let model = TskModel::new(antecedent, chain, input_tf, Consequent::new(coeffs)?, task)?;

    let targets = match task {
        Task::Classification => Targets::labels((0..b).map(|_| rng.random_range(0..out_dim)).collect(), out_dim)?,
        Task::Regression => Targets::Values(Array2::from_shape_fn((b, out_dim), |_| rng.random_range(-2.0..2.0))),
    };
    let mut cfg = TrainConfig::new(1, Optimizer::adam(0.01), loss)?;
    cfg.ur_weight = ur_weight;
    cfg.weight_decay = if rng.random_bool(0.3) { 0.01 } else { 0.0 };
    cfg.seed = rng.random();
    Ok((model, x, targets, cfg))
}

/// Runs `per_combo` random cases for every point of
/// {Gaussian, triangular} x {htsk off, on} x {MSE, CE} x {ur 0, 0.1}.
/// Analytic gradients are `f64`; the reference differences are
/// double-double.
pub fn gradcheck_suite(seed: u64, per_combo: usize, fd_step: f64) -> Result<Vec<GradCheckCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::new();
    for family in [AntecedentFamily::Gaussian, AntecedentFamily::Triangular] {
        for htsk in [false, true] {
            for loss in [LossKind::Mse, LossKind::SoftmaxCrossEntropy] {
                for ur_weight in [0.0, 0.1] {
                    for _ in 0..per_combo {
                        let (model, x, targets, cfg) = random_case(&mut rng, family, htsk, loss, ur_weight)?;
                        let err = grad_check_with::<f64, DoubleDouble>(&model, x.view(), &targets, &cfg, fd_step)?;
                        cases.push(GradCheckCase {
                            family,
                            htsk,
                            loss,
                            ur_weight,
                            n_rules: model.n_rules(),
                            n_dims: model.n_dims(),
                            batch: x.nrows(),
                            max_rel_error: err,
                        });
                    }
                }
            }
        }
    }
    Ok(cases)
}
