use super::params::Gradients;
use super::TrainConfig;
use crate::error::{Result, TskError};
use crate::model::TskModel;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Optimizer<T> {
    Sgd { lr: T, momentum: T },
    Adam { lr: T, beta1: T, beta2: T, eps: T },
}

impl<T: Scalar> Optimizer<T> {
    /// Adam with `beta1 = 0.9`, `beta2 = 0.999`, `eps = 1e-8`.
    pub fn adam(lr: T) -> Self {
        Optimizer::Adam {
            lr,
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            eps: T::lit(1e-8),
        }
    }

    pub fn sgd(lr: T, momentum: T) -> Self {
        Optimizer::Sgd { lr, momentum }
    }

    pub fn cast<U: Scalar>(&self) -> Optimizer<U> {
        let c = |v: T| U::lit(v.as_f64());
        match *self {
            Optimizer::Sgd { lr, momentum } => Optimizer::Sgd {
                lr: c(lr),
                momentum: c(momentum),
            },
            Optimizer::Adam { lr, beta1, beta2, eps } => Optimizer::Adam {
                lr: c(lr),
                beta1: c(beta1),
                beta2: c(beta2),
                eps: c(eps),
            },
        }
    }

    pub fn lr(&self) -> T {
        match *self {
            Optimizer::Sgd { lr, .. } | Optimizer::Adam { lr, .. } => lr,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let ok = |v: T| v.is_finite() && v >= T::zero();
        match *self {
            Optimizer::Sgd { lr, momentum } => {
                if !ok(lr) {
                    return Err(TskError::invalid("lr", "must be finite and >= 0"));
                }
                if !(ok(momentum) && momentum < T::one()) {
                    return Err(TskError::invalid("momentum", "must lie in [0, 1)"));
                }
            }
            Optimizer::Adam { lr, beta1, beta2, eps } => {
                if !ok(lr) {
                    return Err(TskError::invalid("lr", "must be finite and >= 0"));
                }
                if !(ok(beta1) && beta1 < T::one() && ok(beta2) && beta2 < T::one()) {
                    return Err(TskError::invalid("beta", "must lie in [0, 1)"));
                }
                if !(eps > T::zero()) {
                    return Err(TskError::invalid("eps", "must be positive"));
                }
            }
        }
        Ok(())
    }

    /// One in-place update of `params`.
    pub fn step(&self, params: &mut [T], grads: &[T], state: &mut OptimizerState<T>) -> Result<()> {
        if params.len() != grads.len() || params.len() != state.first.len() {
            return Err(TskError::ShapeMismatch {
                what: "optimizer".into(),
                detail: format!(
                    "{} params, {} grads, state for {}",
                    params.len(),
                    grads.len(),
                    state.first.len()
                ),
            });
        }
        state.t += 1;
        match *self {
            Optimizer::Sgd { lr, momentum } => {
                for ((p, &g), v) in params.iter_mut().zip(grads).zip(state.first.iter_mut()) {
                    *v = momentum * *v + g;
                    *p = *p - lr * *v;
                }
            }
            Optimizer::Adam { lr, beta1, beta2, eps } => {
                let t = state.t as i32;
                let c1 = T::one() - beta1.powi(t);
                let c2 = T::one() - beta2.powi(t);
                for (((p, &g), m), v) in params
                    .iter_mut()
                    .zip(grads)
                    .zip(state.first.iter_mut())
                    .zip(state.second.iter_mut())
                {
                    *m = beta1 * *m + (T::one() - beta1) * g;
                    *v = beta2 * *v + (T::one() - beta2) * g * g;
                    let m_hat = *m / c1;
                    let v_hat = *v / c2;
                    *p = *p - lr * m_hat / (v_hat.sqrt() + eps);
                }
            }
        }
        Ok(())
    }
}

/// Moment accumulators (Adam) or velocity (SGD, in `first`).
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState<T> {
    pub t: u64,
    pub first: Vec<T>,
    pub second: Vec<T>,
}

impl<T: Scalar> OptimizerState<T> {
    pub fn new(n_params: usize) -> Self {
        Self {
            t: 0,
            first: vec![T::zero(); n_params],
            second: vec![T::zero(); n_params],
        }
    }
}

/// Applies one optimizer update to the model's trainable parameters and
/// projects them back onto their constraints.
pub fn optimizer_step<T: Scalar>(
    model: &mut TskModel<T>,
    grads: &Gradients<T>,
    state: &mut OptimizerState<T>,
    cfg: &TrainConfig<T>,
) -> Result<()> {
    let mut params = model.trainable_params(cfg.train_antecedent);
    let flat = grads.flatten();
    cfg.optimizer.step(&mut params, &flat, state)?;
    model.set_trainable_params(&params, cfg.train_antecedent, true)
}
