//! The assembled TSK model: antecedent, firing-level transformer, input
//! transformer and linear consequent.

use ndarray::{Array1, Array2, Array3, ArrayView1, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TskError};
use crate::membership::{
    htsk_scale, normalize_in_place, run_chain, sample_fl_masks, Antecedent, ChainTrace, FlMasks, FlTransform, Mode,
};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Classification,
    Regression,
}

/// Training targets: class indices or a real-valued `N x out_dim` matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum Targets<T> {
    Labels { labels: Vec<usize>, n_classes: usize },
    Values(Array2<T>),
}

impl<T: Scalar> Targets<T> {
    pub fn labels(labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(TskError::LabelOutOfRange { label: bad, n_classes });
        }
        Ok(Targets::Labels { labels, n_classes })
    }

    /// Single-output regression targets.
    pub fn values(y: &[T]) -> Self {
        Targets::Values(Array2::from_shape_vec((y.len(), 1), y.to_vec()).expect("column"))
    }

    pub fn len(&self) -> usize {
        match self {
            Targets::Labels { labels, .. } => labels.len(),
            Targets::Values(y) => y.nrows(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn task(&self) -> Task {
        match self {
            Targets::Labels { .. } => Task::Classification,
            Targets::Values(_) => Task::Regression,
        }
    }

    /// Number of model outputs these targets call for.
    pub fn out_dim(&self) -> usize {
        match self {
            Targets::Labels { n_classes, .. } => *n_classes,
            Targets::Values(y) => y.ncols(),
        }
    }

    pub fn select(&self, rows: &[usize]) -> Self {
        match self {
            Targets::Labels { labels, n_classes } => Targets::Labels {
                labels: rows.iter().map(|&i| labels[i]).collect(),
                n_classes: *n_classes,
            },
            Targets::Values(y) => Targets::Values(y.select(ndarray::Axis(0), rows)),
        }
    }

    pub fn cast<U: Scalar>(&self) -> Targets<U> {
        match self {
            Targets::Labels { labels, n_classes } => Targets::Labels {
                labels: labels.clone(),
                n_classes: *n_classes,
            },
            Targets::Values(y) => Targets::Values(y.mapv(|v| U::lit(v.as_f64()))),
        }
    }
}

/// Transformation applied to the input on the consequent path only.
#[derive(Clone, Debug, PartialEq)]
pub enum InputTransform<T> {
    Identity,
    Standardize { mean: Array1<T>, std: Array1<T> },
}

impl<T: Scalar> InputTransform<T> {
    pub fn standardize(mean: Array1<T>, std: Array1<T>) -> Result<Self> {
        if mean.len() != std.len() {
            return Err(TskError::DimensionMismatch {
                expected: mean.len(),
                got: std.len(),
            });
        }
        if std.iter().any(|s| !(*s >= T::lit(1e-12)) || !s.is_finite()) {
            return Err(TskError::invalid("std", "entries must be finite and >= 1e-12"));
        }
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(TskError::invalid("mean", "entries must be finite"));
        }
        Ok(InputTransform::Standardize { mean, std })
    }

    /// Column means and (population) standard deviations of `x`, with
    /// constant columns given unit scale.
    pub fn fit_standardize(x: ArrayView2<'_, T>) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(TskError::EmptyData);
        }
        let n = T::from_usize(x.nrows()).expect("row count");
        let mut mean = Array1::zeros(x.ncols());
        let mut std = Array1::zeros(x.ncols());
        for (d, col) in x.columns().into_iter().enumerate() {
            let m = col.sum() / n;
            let v = col.iter().map(|&v| (v - m) * (v - m)).sum::<T>() / n;
            mean[d] = m;
            std[d] = if v.sqrt() >= T::lit(1e-12) { v.sqrt() } else { T::one() };
        }
        Self::standardize(mean, std)
    }

    /// Writes `[1, x']` into `out` (length `D + 1`).
    pub(crate) fn augment_into(&self, x: &[T], out: &mut [T]) {
        out[0] = T::one();
        match self {
            InputTransform::Identity => out[1..].copy_from_slice(x),
            InputTransform::Standardize { mean, std } => {
                for (d, o) in out[1..].iter_mut().enumerate() {
                    *o = (x[d] - mean[d]) / std[d];
                }
            }
        }
    }

    fn dim(&self) -> Option<usize> {
        match self {
            InputTransform::Identity => None,
            InputTransform::Standardize { mean, .. } => Some(mean.len()),
        }
    }
}

/// Per-rule affine maps, `coeffs[[r, o, j]]` multiplying `[1, x']_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Consequent<T> {
    pub(crate) coeffs: Array3<T>,
}

impl<T: Scalar> Consequent<T> {
    pub fn new(coeffs: Array3<T>) -> Result<Self> {
        let (r, o, p) = coeffs.dim();
        if r == 0 || o == 0 || p < 2 {
            return Err(TskError::ShapeMismatch {
                what: "consequent".into(),
                detail: format!("invalid shape ({r}, {o}, {p})"),
            });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(TskError::NonFinite("consequent".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn zeros(n_rules: usize, out_dim: usize, n_dims: usize) -> Self {
        Self {
            coeffs: Array3::zeros((n_rules, out_dim, n_dims + 1)),
        }
    }

    pub fn coeffs(&self) -> &Array3<T> {
        &self.coeffs
    }

    pub fn n_rules(&self) -> usize {
        self.coeffs.dim().0
    }

    pub fn out_dim(&self) -> usize {
        self.coeffs.dim().1
    }

    pub fn n_dims(&self) -> usize {
        self.coeffs.dim().2 - 1
    }

    /// Flattens to the `R(D+1) x out_dim` layout produced by the FCM design matrix.
    pub fn to_design_coefficients(&self) -> Array2<T> {
        let (r, o, p) = self.coeffs.dim();
        Array2::from_shape_fn((r * p, o), |(row, out)| self.coeffs[[row / p, out, row % p]])
    }
}

/// Intermediate values of one forward pass, reused by backprop.
#[derive(Clone, Debug, Default)]
pub(crate) struct ForwardTrace<T> {
    pub z: Vec<T>,
    pub wbar: Vec<T>,
    pub chain: ChainTrace<T>,
    /// `[1, x']`
    pub xt: Vec<T>,
    /// `R x out_dim` rule outputs, row-major.
    pub rule_out: Vec<T>,
    pub output: Vec<T>,
}

impl<T: Scalar> ForwardTrace<T> {
    pub fn wtilde(&self) -> &[T] {
        self.chain.output()
    }
}

/// A complete TSK fuzzy model.
#[derive(Clone, Debug, PartialEq)]
pub struct TskModel<T> {
    pub(crate) antecedent: Antecedent<T>,
    pub(crate) fl_chain: Vec<FlTransform<T>>,
    pub(crate) input_tf: InputTransform<T>,
    pub(crate) consequent: Consequent<T>,
    pub(crate) task: Task,
    /// Original class names, index-aligned with the output scores.
    pub labels: Option<Vec<String>>,
    /// Name of the target column the model was fitted on.
    pub target_name: Option<String>,
}

impl<T: Scalar> TskModel<T> {
    pub fn new(
        antecedent: Antecedent<T>,
        fl_chain: Vec<FlTransform<T>>,
        input_tf: InputTransform<T>,
        consequent: Consequent<T>,
        task: Task,
    ) -> Result<Self> {
        let (r, d) = (antecedent.n_rules(), antecedent.n_dims());
        if consequent.n_rules() != r {
            return Err(TskError::ShapeMismatch {
                what: "consequent".into(),
                detail: format!("{} rules, antecedent has {r}", consequent.n_rules()),
            });
        }
        if consequent.n_dims() != d {
            return Err(TskError::ShapeMismatch {
                what: "consequent".into(),
                detail: format!("{} inputs, antecedent has {d}", consequent.n_dims()),
            });
        }
        if let Some(td) = input_tf.dim() {
            if td != d {
                return Err(TskError::ShapeMismatch {
                    what: "input_tf".into(),
                    detail: format!("length {td}, expected {d}"),
                });
            }
        }
        for t in &fl_chain {
            if let FlTransform::RuleWeights(w) = t {
                if w.len() != r {
                    return Err(TskError::ShapeMismatch {
                        what: "fl_chain".into(),
                        detail: format!("rule weights of length {}, expected {r}", w.len()),
                    });
                }
            }
        }
        if task == Task::Classification && consequent.out_dim() < 2 {
            return Err(TskError::invalid(
                "out_dim",
                "classification needs at least two outputs",
            ));
        }
        Ok(Self {
            antecedent,
            fl_chain,
            input_tf,
            consequent,
            task,
            labels: None,
            target_name: None,
        })
    }

    /// Replaces the consequent, keeping every other part.
    pub fn with_consequent(self, consequent: Consequent<T>) -> Result<Self> {
        self.rebuild(|m| m.consequent = consequent)
    }

    pub fn with_input_transform(self, input_tf: InputTransform<T>) -> Result<Self> {
        self.rebuild(|m| m.input_tf = input_tf)
    }

    pub fn with_fl_chain(self, fl_chain: Vec<FlTransform<T>>) -> Result<Self> {
        self.rebuild(|m| m.fl_chain = fl_chain)
    }

    fn rebuild(mut self, edit: impl FnOnce(&mut Self)) -> Result<Self> {
        edit(&mut self);
        let (labels, target_name) = (self.labels, self.target_name);
        let mut m = Self::new(
            self.antecedent,
            self.fl_chain,
            self.input_tf,
            self.consequent,
            self.task,
        )?;
        m.labels = labels;
        m.target_name = target_name;
        Ok(m)
    }

    pub fn antecedent(&self) -> &Antecedent<T> {
        &self.antecedent
    }

    pub fn fl_chain(&self) -> &[FlTransform<T>] {
        &self.fl_chain
    }

    pub fn input_transform(&self) -> &InputTransform<T> {
        &self.input_tf
    }

    pub fn consequent(&self) -> &Consequent<T> {
        &self.consequent
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn n_rules(&self) -> usize {
        self.antecedent.n_rules()
    }

    pub fn n_dims(&self) -> usize {
        self.antecedent.n_dims()
    }

    pub fn out_dim(&self) -> usize {
        self.consequent.out_dim()
    }

    /// Sets the probability of every DropRule stage, appending one if the
    /// chain has none. `p == 0` with no existing stage leaves the chain alone.
    pub fn set_droprule(&mut self, p: T) -> Result<()> {
        let stage = FlTransform::drop_rule(p)?;
        let mut found = false;
        for t in self.fl_chain.iter_mut() {
            if let FlTransform::DropRule(q) = t {
                *q = p;
                found = true;
            }
        }
        if !found && p > T::zero() {
            self.fl_chain.push(stage);
        }
        Ok(())
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.n_dims() {
            return Err(TskError::DimensionMismatch {
                expected: self.n_dims(),
                got,
            });
        }
        Ok(())
    }

    pub(crate) fn forward_traced(&self, x: &[T], masks: &FlMasks, tr: &mut ForwardTrace<T>) -> Result<()> {
        let (r, d, o) = (self.n_rules(), self.n_dims(), self.out_dim());
        tr.z.resize(r, T::zero());
        self.antecedent.log_firing_into(x, &mut tr.z);
        tr.wbar.clear();
        tr.wbar.extend_from_slice(&tr.z);
        normalize_in_place(&mut tr.wbar, htsk_scale(self.antecedent.htsk, d));
        run_chain(&tr.wbar, &self.fl_chain, masks, &mut tr.chain)?;

        tr.xt.resize(d + 1, T::zero());
        self.input_tf.augment_into(x, &mut tr.xt);
        tr.rule_out.resize(r * o, T::zero());
        tr.output.clear();
        tr.output.resize(o, T::zero());
        let w = tr.chain.output();
        let coeffs = self.consequent.coeffs.as_slice().expect("standard layout");
        let p = d + 1;
        for (rule, &wr) in w.iter().enumerate() {
            for out in 0..o {
                let base = (rule * o + out) * p;
                let y: T = coeffs[base..base + p].iter().zip(&tr.xt).map(|(&c, &xv)| c * xv).sum();
                tr.rule_out[rule * o + out] = y;
                tr.output[out] = tr.output[out] + wr * y;
            }
        }
        Ok(())
    }

    /// Defuzzified output for one input.
    pub fn forward<R: Rng + ?Sized>(&self, x: ArrayView1<'_, T>, mode: Mode, rng: &mut R) -> Result<Array1<T>> {
        self.check_dim(x.len())?;
        let masks = sample_fl_masks(&self.fl_chain, self.n_rules(), mode, rng);
        self.forward_masked(x, &masks)
    }

    /// Forward pass with DropRule masks supplied by the caller.
    pub fn forward_masked(&self, x: ArrayView1<'_, T>, masks: &FlMasks) -> Result<Array1<T>> {
        self.check_dim(x.len())?;
        let mut tr = ForwardTrace::default();
        self.forward_traced(&x.to_vec(), masks, &mut tr)?;
        Ok(Array1::from(tr.output))
    }

    /// Deterministic eval-mode forward pass.
    pub fn forward_eval(&self, x: ArrayView1<'_, T>) -> Result<Array1<T>> {
        let masks = vec![None; self.fl_chain.len()];
        self.forward_masked(x, &masks)
    }

    /// Row-wise forward; train-mode masks are drawn independently per row.
    pub fn forward_batch<R: Rng + ?Sized>(&self, x: ArrayView2<'_, T>, mode: Mode, rng: &mut R) -> Result<Array2<T>> {
        self.forward_rows(x, || sample_fl_masks(&self.fl_chain, self.n_rules(), mode, rng))
    }

    pub fn forward_batch_eval(&self, x: ArrayView2<'_, T>) -> Result<Array2<T>> {
        self.forward_rows(x, || vec![None; self.fl_chain.len()])
    }

    fn forward_rows(&self, x: ArrayView2<'_, T>, mut masks: impl FnMut() -> FlMasks) -> Result<Array2<T>> {
        self.check_dim(x.ncols())?;
        let mut out = Array2::zeros((x.nrows(), self.out_dim()));
        let mut tr = ForwardTrace::default();
        let mut row = vec![T::zero(); x.ncols()];
        for (xi, mut oi) in x.rows().into_iter().zip(out.rows_mut()) {
            let m = masks();
            row.iter_mut().zip(xi.iter()).for_each(|(a, &b)| *a = b);
            self.forward_traced(&row, &m, &mut tr)?;
            oi.iter_mut().zip(&tr.output).for_each(|(a, &b)| *a = b);
        }
        Ok(out)
    }

    /// `N x R` normalized firing levels, before the transform chain.
    pub fn normalized_firing(&self, x: ArrayView2<'_, T>) -> Result<Array2<T>> {
        self.check_dim(x.ncols())?;
        let (r, d) = (self.n_rules(), self.n_dims());
        let scale = htsk_scale(self.antecedent.htsk, d);
        let mut out = Array2::zeros((x.nrows(), r));
        let mut row = vec![T::zero(); d];
        let mut z = vec![T::zero(); r];
        for (xi, mut oi) in x.rows().into_iter().zip(out.rows_mut()) {
            row.iter_mut().zip(xi.iter()).for_each(|(a, &b)| *a = b);
            self.antecedent.log_firing_into(&row, &mut z);
            normalize_in_place(&mut z, scale);
            oi.iter_mut().zip(&z).for_each(|(a, &b)| *a = b);
        }
        Ok(out)
    }

    /// Index of the highest score; the lowest index wins ties.
    pub fn predict_class(&self, x: ArrayView1<'_, T>) -> Result<usize> {
        if self.task != Task::Classification {
            return Err(TskError::TaskMismatch("predict_class on a regression model".into()));
        }
        Ok(argmax(self.forward_eval(x)?.as_slice().expect("contiguous")))
    }

    pub fn predict_classes(&self, x: ArrayView2<'_, T>) -> Result<Vec<usize>> {
        if self.task != Task::Classification {
            return Err(TskError::TaskMismatch("predict_class on a regression model".into()));
        }
        let scores = self.forward_batch_eval(x)?;
        Ok(scores
            .rows()
            .into_iter()
            .map(|r| argmax(r.as_slice().expect("contiguous")))
            .collect())
    }
}

/// Smallest index attaining the maximum.
pub fn argmax<T: PartialOrd + Copy>(scores: &[T]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}
