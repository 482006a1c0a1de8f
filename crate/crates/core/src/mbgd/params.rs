//! Flat views of a model's trainable scalars and the matching gradient
//! container.
//!
//! Order: consequent coefficients (row-major `[rule][output][coef]`), then
//! the weights of each `RuleWeights` stage in chain order, then (when the
//! antecedent is trained) Gaussian centers and widths, or triangular left,
//! peak and right points, each `R x D` row-major. FCM antecedents have no
//! trainable parameters.

use ndarray::{Array1, Array2, Array3};

use crate::error::{Result, TskError};
use crate::membership::{AntecedentKind, FlTransform, SIGMA_FLOOR};
use crate::model::TskModel;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub enum AntecedentGrad<T> {
    None,
    Gaussian {
        centers: Array2<T>,
        sigmas: Array2<T>,
    },
    Triangular {
        left: Array2<T>,
        peak: Array2<T>,
        right: Array2<T>,
    },
}

/// Gradients shaped like the model parameters they belong to.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients<T> {
    pub consequent: Array3<T>,
    /// One entry per `RuleWeights` stage, in chain order.
    pub rule_weights: Vec<Array1<T>>,
    pub antecedent: AntecedentGrad<T>,
}

impl<T: Scalar> Gradients<T> {
    pub(crate) fn zeros_like(model: &TskModel<T>, with_antecedent: bool) -> Self {
        let (r, d) = (model.n_rules(), model.n_dims());
        let rule_weights = model
            .fl_chain
            .iter()
            .filter(|t| matches!(t, FlTransform::RuleWeights(_)))
            .map(|_| Array1::zeros(r))
            .collect();
        let antecedent = match (&model.antecedent.kind, with_antecedent) {
            (AntecedentKind::GaussianGrid(_), true) => AntecedentGrad::Gaussian {
                centers: Array2::zeros((r, d)),
                sigmas: Array2::zeros((r, d)),
            },
            (AntecedentKind::TriangularGrid(_), true) => AntecedentGrad::Triangular {
                left: Array2::zeros((r, d)),
                peak: Array2::zeros((r, d)),
                right: Array2::zeros((r, d)),
            },
            _ => AntecedentGrad::None,
        };
        Self {
            consequent: Array3::zeros(model.consequent.coeffs.dim()),
            rule_weights,
            antecedent,
        }
    }

    /// Concatenates every gradient in the flat parameter order.
    pub fn flatten(&self) -> Vec<T> {
        let mut out: Vec<T> = self.consequent.iter().copied().collect();
        for w in &self.rule_weights {
            out.extend(w.iter().copied());
        }
        match &self.antecedent {
            AntecedentGrad::None => {}
            AntecedentGrad::Gaussian { centers, sigmas } => {
                out.extend(centers.iter().copied());
                out.extend(sigmas.iter().copied());
            }
            AntecedentGrad::Triangular { left, peak, right } => {
                out.extend(left.iter().copied());
                out.extend(peak.iter().copied());
                out.extend(right.iter().copied());
            }
        }
        out
    }
}

impl<T: Scalar> TskModel<T> {
    /// Current values of all trainable scalars in flat order.
    pub fn trainable_params(&self, include_antecedent: bool) -> Vec<T> {
        let mut out: Vec<T> = self.consequent.coeffs.iter().copied().collect();
        for t in &self.fl_chain {
            if let FlTransform::RuleWeights(w) = t {
                out.extend(w.iter().copied());
            }
        }
        if include_antecedent {
            match &self.antecedent.kind {
                AntecedentKind::GaussianGrid(g) => {
                    out.extend(g.iter().map(|mf| mf.center));
                    out.extend(g.iter().map(|mf| mf.sigma));
                }
                AntecedentKind::TriangularGrid(g) => {
                    out.extend(g.iter().map(|mf| mf.left));
                    out.extend(g.iter().map(|mf| mf.peak));
                    out.extend(g.iter().map(|mf| mf.right));
                }
                AntecedentKind::FcmInverseDistance(_) => {}
            }
        }
        out
    }

    pub fn n_trainable(&self, include_antecedent: bool) -> usize {
        let rw: usize = self
            .fl_chain
            .iter()
            .map(|t| match t {
                FlTransform::RuleWeights(w) => w.len(),
                _ => 0,
            })
            .sum();
        let ant = if include_antecedent {
            let rd = self.n_rules() * self.n_dims();
            match &self.antecedent.kind {
                AntecedentKind::GaussianGrid(_) => 2 * rd,
                AntecedentKind::TriangularGrid(_) => 3 * rd,
                AntecedentKind::FcmInverseDistance(_) => 0,
            }
        } else {
            0
        };
        self.consequent.coeffs.len() + rw + ant
    }

    /// Writes back flat parameter values. With `project`, widths are raised
    /// to the floor, triangles are re-ordered and rule weights are clamped
    /// to be nonnegative and not all zero.
    pub fn set_trainable_params(&mut self, values: &[T], include_antecedent: bool, project: bool) -> Result<()> {
        let expected = self.n_trainable(include_antecedent);
        if values.len() != expected {
            return Err(TskError::DimensionMismatch {
                expected,
                got: values.len(),
            });
        }
        let mut it = values.iter().copied();
        for c in self.consequent.coeffs.iter_mut() {
            *c = it.next().expect("length checked");
        }
        for t in self.fl_chain.iter_mut() {
            if let FlTransform::RuleWeights(w) = t {
                for v in w.iter_mut() {
                    *v = it.next().expect("length checked");
                }
                if project {
                    w.mapv_inplace(|v| v.max(T::zero()));
                    if w.iter().all(|v| *v == T::zero()) {
                        w.fill(T::one());
                    }
                }
            }
        }
        if include_antecedent {
            match &mut self.antecedent.kind {
                AntecedentKind::GaussianGrid(g) => {
                    for mf in g.iter_mut() {
                        mf.center = it.next().expect("length checked");
                    }
                    for mf in g.iter_mut() {
                        mf.sigma = it.next().expect("length checked");
                        if project {
                            mf.sigma = mf.sigma.max(T::lit(SIGMA_FLOOR));
                        }
                    }
                }
                AntecedentKind::TriangularGrid(g) => {
                    for mf in g.iter_mut() {
                        mf.left = it.next().expect("length checked");
                    }
                    for mf in g.iter_mut() {
                        mf.peak = it.next().expect("length checked");
                    }
                    for mf in g.iter_mut() {
                        mf.right = it.next().expect("length checked");
                        if project {
                            mf.project();
                        }
                    }
                }
                AntecedentKind::FcmInverseDistance(_) => {}
            }
        }
        Ok(())
    }

    /// Smallest Gaussian width, if the antecedent is a Gaussian grid.
    pub fn min_sigma(&self) -> Option<T> {
        match &self.antecedent.kind {
            AntecedentKind::GaussianGrid(g) => g.iter().map(|mf| mf.sigma).reduce(T::min),
            _ => None,
        }
    }
}
