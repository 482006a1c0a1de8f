//! Hand-derived backpropagation through the full TSK forward pass.

use ndarray::{Array2, ArrayView2};
use rand::Rng;

use super::loss::{loss_mse, loss_softmax_ce, ur_penalty};
use super::params::{AntecedentGrad, Gradients};
use super::{LossKind, TrainConfig};
use crate::error::{Result, TskError};
use crate::membership::{
    backprop_chain, htsk_scale, sample_fl_masks, AntecedentKind, FlMasks, FlTransform, Mode, GAUSS_EPS,
    MEMBERSHIP_FLOOR,
};
use crate::model::{ForwardTrace, Targets, Task, TskModel};
use crate::scalar::Scalar;

/// Loss terms of one batch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossParts<T> {
    pub total: T,
    pub data: T,
    pub ur: T,
    pub weight_decay: T,
}

#[derive(Clone, Debug)]
pub struct BackwardOutput<T> {
    pub loss: LossParts<T>,
    pub grads: Gradients<T>,
}

pub(crate) fn check_task<T: Scalar>(model: &TskModel<T>, targets: &Targets<T>, loss: LossKind) -> Result<()> {
    match (model.task(), targets, loss) {
        (Task::Classification, Targets::Labels { n_classes, .. }, LossKind::SoftmaxCrossEntropy) => {
            if *n_classes != model.out_dim() {
                return Err(TskError::ShapeMismatch {
                    what: "targets".into(),
                    detail: format!("{n_classes} classes for a model with {} outputs", model.out_dim()),
                });
            }
            Ok(())
        }
        (Task::Regression, Targets::Values(y), LossKind::Mse) => {
            if y.ncols() != model.out_dim() {
                return Err(TskError::ShapeMismatch {
                    what: "targets".into(),
                    detail: format!(
                        "{} target columns for a model with {} outputs",
                        y.ncols(),
                        model.out_dim()
                    ),
                });
            }
            Ok(())
        }
        _ => Err(TskError::TaskMismatch(format!(
            "{:?} loss with {:?} model and {:?} targets",
            loss,
            model.task(),
            targets.task()
        ))),
    }
}

/// Draws one set of DropRule masks per row.
pub fn sample_batch_masks<T: Scalar, R: Rng + ?Sized>(model: &TskModel<T>, rows: usize, rng: &mut R) -> Vec<FlMasks> {
    (0..rows)
        .map(|_| sample_fl_masks(&model.fl_chain, model.n_rules(), Mode::Train, rng))
        .collect()
}

struct BatchForward<T> {
    traces: Vec<ForwardTrace<T>>,
    data: T,
    grad_pred: Array2<T>,
    ur: T,
    grad_wbar: Option<Array2<T>>,
    decay: T,
}

fn forward_batch<T: Scalar>(
    model: &TskModel<T>,
    x: ArrayView2<'_, T>,
    targets: &Targets<T>,
    cfg: &TrainConfig<T>,
    masks: &[FlMasks],
) -> Result<BatchForward<T>> {
    check_task(model, targets, cfg.loss)?;
    let b = x.nrows();
    if x.ncols() != model.n_dims() {
        return Err(TskError::DimensionMismatch {
            expected: model.n_dims(),
            got: x.ncols(),
        });
    }
    if targets.len() != b || masks.len() != b {
        return Err(TskError::ShapeMismatch {
            what: "batch".into(),
            detail: format!("{b} rows, {} targets, {} mask sets", targets.len(), masks.len()),
        });
    }
    let (r, o) = (model.n_rules(), model.out_dim());
    let mut traces = Vec::with_capacity(b);
    let mut pred = Array2::zeros((b, o));
    let mut wbar = Array2::zeros((b, r));
    let mut row = vec![T::zero(); x.ncols()];
    for (i, xi) in x.rows().into_iter().enumerate() {
        row.iter_mut().zip(xi.iter()).for_each(|(a, &v)| *a = v);
        let mut tr = ForwardTrace::default();
        model.forward_traced(&row, &masks[i], &mut tr)?;
        pred.row_mut(i).iter_mut().zip(&tr.output).for_each(|(a, &v)| *a = v);
        wbar.row_mut(i).iter_mut().zip(&tr.wbar).for_each(|(a, &v)| *a = v);
        traces.push(tr);
    }

    let (data, grad_pred) = match targets {
        Targets::Labels { labels, .. } => loss_softmax_ce(pred.view(), labels)?,
        Targets::Values(y) => loss_mse(pred.view(), y.view())?,
    };
    let (ur, grad_wbar) = if cfg.ur_weight > T::zero() {
        let (v, g) = ur_penalty(wbar.view(), cfg.ur_weight)?;
        (v, Some(g))
    } else {
        (T::zero(), None)
    };
    let decay = if cfg.weight_decay > T::zero() {
        cfg.weight_decay * model.consequent.coeffs.iter().map(|&c| c * c).sum::<T>()
    } else {
        T::zero()
    };
    Ok(BatchForward {
        traces,
        data,
        grad_pred,
        ur,
        grad_wbar,
        decay,
    })
}

/// Loss of a batch with fixed masks, without gradients.
pub fn batch_loss_masked<T: Scalar>(
    model: &TskModel<T>,
    x: ArrayView2<'_, T>,
    targets: &Targets<T>,
    cfg: &TrainConfig<T>,
    masks: &[FlMasks],
) -> Result<LossParts<T>> {
    let f = forward_batch(model, x, targets, cfg, masks)?;
    Ok(LossParts {
        total: f.data + f.ur + f.decay,
        data: f.data,
        ur: f.ur,
        weight_decay: f.decay,
    })
}

/// Loss and gradients, drawing fresh DropRule masks (one set per row).
pub fn backward<T: Scalar, R: Rng + ?Sized>(
    model: &TskModel<T>,
    x: ArrayView2<'_, T>,
    targets: &Targets<T>,
    cfg: &TrainConfig<T>,
    rng: &mut R,
) -> Result<BackwardOutput<T>> {
    let masks = sample_batch_masks(model, x.nrows(), rng);
    backward_masked(model, x, targets, cfg, &masks)
}

/// Loss and gradients with caller-supplied masks, treated as constants.
pub fn backward_masked<T: Scalar>(
    model: &TskModel<T>,
    x: ArrayView2<'_, T>,
    targets: &Targets<T>,
    cfg: &TrainConfig<T>,
    masks: &[FlMasks],
) -> Result<BackwardOutput<T>> {
    let f = forward_batch(model, x, targets, cfg, masks)?;
    let (r, d, o) = (model.n_rules(), model.n_dims(), model.out_dim());
    let p = d + 1;
    let mut grads = Gradients::zeros_like(model, cfg.train_antecedent);
    let mut weight_grads: Vec<Vec<T>> = grads.rule_weights.iter().map(|_| vec![T::zero(); r]).collect();
    let scale: T = htsk_scale(model.antecedent.htsk, d);
    let log_floor = T::lit(MEMBERSHIP_FLOOR).ln();
    let floor = T::lit(MEMBERSHIP_FLOOR);
    let eps = T::lit(GAUSS_EPS);

    let gc = grads.consequent.as_slice_mut().expect("standard layout");
    let mut g_w = vec![T::zero(); r];
    let mut g_z = vec![T::zero(); r];
    for (i, tr) in f.traces.iter().enumerate() {
        let gy = f.grad_pred.row(i);
        let wt = tr.wtilde();
        // consequent and defuzzification weights
        for rule in 0..r {
            let mut acc = T::zero();
            for out in 0..o {
                let g = gy[out];
                acc = acc + g * tr.rule_out[rule * o + out];
                let gw = g * wt[rule];
                let base = (rule * o + out) * p;
                for (c, &xv) in gc[base..base + p].iter_mut().zip(&tr.xt) {
                    *c = *c + gw * xv;
                }
            }
            g_w[rule] = acc;
        }
        backprop_chain(&model.fl_chain, &masks[i], &tr.chain, &mut g_w, &mut weight_grads);
        if let Some(gu) = &f.grad_wbar {
            for (g, &u) in g_w.iter_mut().zip(gu.row(i).iter()) {
                *g = *g + u;
            }
        }
        if matches!(grads.antecedent, AntecedentGrad::None) {
            continue;
        }
        // softmax (with the HTSK scale) back to log firing levels
        let dot: T = g_w.iter().zip(&tr.wbar).map(|(&g, &w)| g * w).sum();
        for rule in 0..r {
            g_z[rule] = scale * tr.wbar[rule] * (g_w[rule] - dot);
        }
        let xi = x.row(i);
        match (&model.antecedent.kind, &mut grads.antecedent) {
            (AntecedentKind::GaussianGrid(grid), AntecedentGrad::Gaussian { centers, sigmas }) => {
                for ((rule, dim), mf) in grid.indexed_iter() {
                    if mf.log_eval(xi[dim]) < log_floor {
                        continue;
                    }
                    let diff = xi[dim] - mf.center;
                    let var = mf.sigma * mf.sigma + eps;
                    centers[[rule, dim]] = centers[[rule, dim]] + g_z[rule] * diff / var;
                    sigmas[[rule, dim]] = sigmas[[rule, dim]] + g_z[rule] * diff * diff * mf.sigma / (var * var);
                }
            }
            (AntecedentKind::TriangularGrid(grid), AntecedentGrad::Triangular { left, peak, right }) => {
                for ((rule, dim), mf) in grid.indexed_iter() {
                    let xv = xi[dim];
                    if mf.eval(xv) < floor || xv == mf.peak {
                        continue;
                    }
                    let g = g_z[rule];
                    if xv < mf.peak {
                        let (a, wl) = (xv - mf.left, mf.peak - mf.left);
                        left[[rule, dim]] = left[[rule, dim]] + g * (T::one() / wl - T::one() / a);
                        peak[[rule, dim]] = peak[[rule, dim]] - g / wl;
                    } else {
                        let (a, wr) = (mf.right - xv, mf.right - mf.peak);
                        right[[rule, dim]] = right[[rule, dim]] + g * (T::one() / a - T::one() / wr);
                        peak[[rule, dim]] = peak[[rule, dim]] + g / wr;
                    }
                }
            }
            _ => unreachable!("gradient kind follows antecedent kind"),
        }
    }

    if cfg.weight_decay > T::zero() {
        let two_wd = T::lit(2.0) * cfg.weight_decay;
        for (g, &c) in gc.iter_mut().zip(model.consequent.coeffs.iter()) {
            *g = *g + two_wd * c;
        }
    }
    for (dst, src) in grads.rule_weights.iter_mut().zip(weight_grads) {
        dst.iter_mut().zip(src).for_each(|(a, b)| *a = b);
    }
    debug_assert_eq!(
        grads.rule_weights.len(),
        model
            .fl_chain
            .iter()
            .filter(|t| matches!(t, FlTransform::RuleWeights(_)))
            .count()
    );

    Ok(BackwardOutput {
        loss: LossParts {
            total: f.data + f.ur + f.decay,
            data: f.data,
            ur: f.ur,
            weight_decay: f.decay,
        },
        grads,
    })
}
