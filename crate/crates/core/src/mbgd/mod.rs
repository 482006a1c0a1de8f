//! Mini-batch gradient-descent training of TSK models.
//!
//! Forward values and gradients are computed by hand (see [`backward`]);
//! [`grad_check`] compares them against central finite differences.
//! Uniform regularization acts on the normalized firing levels before the
//! firing-level transform chain, so DropRule masks never enter the penalty.

mod check;
mod grad;
mod init;
mod loss;
mod optim;
mod params;

use std::time::Instant;

use ndarray::{ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use check::{
    grad_check, grad_check_with, gradcheck_suite, random_case, AntecedentFamily, GradCheckCase, GradCheckProblem,
};
pub use grad::{backward, backward_masked, batch_loss_masked, sample_batch_masks, BackwardOutput, LossParts};
pub use init::{init_antecedent_kmeans, init_mbgd_model};
pub use loss::{loss_mse, loss_softmax_ce, ur_penalty};
pub use optim::{optimizer_step, Optimizer, OptimizerState};
pub use params::{AntecedentGrad, Gradients};

use crate::error::{Result, TskError};
use crate::fcm::check_finite;
use crate::metrics::{accuracy, rmse};
use crate::model::{Targets, TskModel};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossKind {
    Mse,
    SoftmaxCrossEntropy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig<T> {
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: Optimizer<T>,
    pub loss: LossKind,
    /// Uniform-regularization weight.
    pub ur_weight: T,
    pub droprule_p: T,
    /// L2 penalty on consequent coefficients.
    pub weight_decay: T,
    /// Fraction of samples held out for early stopping.
    pub val_fraction: T,
    /// Non-improving epochs tolerated before stopping; `0` never stops early.
    pub patience: usize,
    pub seed: u64,
    pub train_antecedent: bool,
}

impl<T: Scalar> TrainConfig<T> {
    pub fn new(epochs: usize, optimizer: Optimizer<T>, loss: LossKind) -> Result<Self> {
        let cfg = Self {
            epochs,
            batch_size: 64,
            optimizer,
            loss,
            ur_weight: T::zero(),
            droprule_p: T::zero(),
            weight_decay: T::zero(),
            val_fraction: T::zero(),
            patience: 0,
            seed: 0,
            train_antecedent: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn cast<U: Scalar>(&self) -> TrainConfig<U> {
        let c = |v: T| U::lit(v.as_f64());
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            optimizer: self.optimizer.cast(),
            loss: self.loss,
            ur_weight: c(self.ur_weight),
            droprule_p: c(self.droprule_p),
            weight_decay: c(self.weight_decay),
            val_fraction: c(self.val_fraction),
            patience: self.patience,
            seed: self.seed,
            train_antecedent: self.train_antecedent,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(TskError::invalid("epochs", "must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(TskError::invalid("batch_size", "must be at least 1"));
        }
        self.optimizer.validate()?;
        let nonneg = |v: T| v.is_finite() && v >= T::zero();
        if !nonneg(self.ur_weight) {
            return Err(TskError::invalid("ur_weight", "must be >= 0"));
        }
        if !nonneg(self.weight_decay) {
            return Err(TskError::invalid("weight_decay", "must be >= 0"));
        }
        if !(nonneg(self.droprule_p) && self.droprule_p < T::one()) {
            return Err(TskError::invalid("droprule_p", "must lie in [0, 1)"));
        }
        if !(nonneg(self.val_fraction) && self.val_fraction < T::one()) {
            return Err(TskError::invalid("val_fraction", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord<T> {
    /// Sample-weighted mean of the total batch loss.
    pub train_loss: T,
    pub ur_penalty: T,
    /// Accuracy (classification) or RMSE (regression) on the held-out tail.
    pub val_metric: Option<f64>,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainHistory<T> {
    pub records: Vec<EpochRecord<T>>,
    /// Epoch (1-based) whose parameters were restored, when validating.
    pub best_epoch: Option<usize>,
    pub stopped_early: bool,
}

fn validation_metric<T: Scalar>(model: &TskModel<T>, x: ArrayView2<'_, T>, targets: &Targets<T>) -> Result<f64> {
    Ok(match targets {
        Targets::Labels { labels, .. } => accuracy(&model.predict_classes(x)?, labels),
        Targets::Values(y) => rmse(model.forward_batch_eval(x)?.view(), y.view()),
    })
}

/// Trains `model` in place. With a validation split the best-epoch
/// parameters are restored at the end.
pub fn train<T: Scalar>(
    model: &mut TskModel<T>,
    x: ArrayView2<'_, T>,
    targets: &Targets<T>,
    cfg: &TrainConfig<T>,
) -> Result<TrainHistory<T>> {
    cfg.validate()?;
    let n = x.nrows();
    if n == 0 {
        return Err(TskError::EmptyData);
    }
    if targets.len() != n {
        return Err(TskError::ShapeMismatch {
            what: "targets".into(),
            detail: format!("{} targets for {n} samples", targets.len()),
        });
    }
    if x.ncols() != model.n_dims() {
        return Err(TskError::DimensionMismatch {
            expected: model.n_dims(),
            got: x.ncols(),
        });
    }
    check_finite(x, "data")?;
    grad::check_task(model, targets, cfg.loss)?;
    model.set_droprule(cfg.droprule_p)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut val_rows = Vec::new();
    if cfg.val_fraction > T::zero() {
        order.shuffle(&mut rng);
        let n_val = (cfg.val_fraction.as_f64() * n as f64).floor() as usize;
        if n_val > 0 && n_val < n {
            val_rows = order.split_off(n - n_val);
        }
    }
    let val = if val_rows.is_empty() {
        None
    } else {
        Some((x.select(Axis(0), &val_rows), targets.select(&val_rows)))
    };

    let mut state = OptimizerState::new(model.n_trainable(cfg.train_antecedent));
    let mut history = TrainHistory::default();
    let mut best: Option<(f64, TskModel<T>)> = None;
    let mut stale = 0usize;
    let start = Instant::now();

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = T::zero();
        let mut ur_sum = T::zero();
        for chunk in order.chunks(cfg.batch_size) {
            let xb = x.select(Axis(0), chunk);
            let tb = targets.select(chunk);
            let out = backward(model, xb.view(), &tb, cfg, &mut rng)?;
            if !out.loss.total.is_finite() {
                return Err(TskError::Diverged { epoch });
            }
            let w = T::from_usize(chunk.len()).expect("batch size");
            loss_sum = loss_sum + out.loss.total * w;
            ur_sum = ur_sum + out.loss.ur * w;
            optimizer_step(model, &out.grads, &mut state, cfg)?;
        }
        let nt = T::from_usize(order.len()).expect("row count");
        let val_metric = match &val {
            Some((xv, tv)) => Some(validation_metric(model, xv.view(), tv)?),
            None => None,
        };
        history.records.push(EpochRecord {
            train_loss: loss_sum / nt,
            ur_penalty: ur_sum / nt,
            val_metric,
            wall_seconds: start.elapsed().as_secs_f64(),
        });

        if let Some(metric) = val_metric {
            if !metric.is_finite() {
                return Err(TskError::Diverged { epoch });
            }
            let improved = match &best {
                None => true,
                Some((b, _)) => match targets {
                    Targets::Labels { .. } => metric > *b,
                    Targets::Values(_) => metric < *b,
                },
            };
            if improved {
                best = Some((metric, model.clone()));
                history.best_epoch = Some(epoch);
                stale = 0;
            } else {
                stale += 1;
                if cfg.patience > 0 && stale >= cfg.patience {
                    history.stopped_early = true;
                    break;
                }
            }
        }
    }

    if let Some((_, snapshot)) = best {
        *model = snapshot;
    }
    Ok(history)
}
