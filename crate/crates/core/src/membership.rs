//! Membership functions, log-domain rule firing levels, firing-level
//! normalization (standard and HTSK) and the firing-level transform chain.
//!
//! Firing levels are carried as logarithms so that products of many
//! memberships never underflow; normalization is a max-subtracted softmax.

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;

use crate::error::{Result, TskError};
use crate::fcm::FcmModel;
use crate::scalar::Scalar;

/// Lower bound enforced on every Gaussian width.
pub const SIGMA_FLOOR: f64 = 1e-4;
/// Added to `sigma^2` inside the Gaussian exponent.
pub const GAUSS_EPS: f64 = 1e-8;
/// Memberships are floored here before taking logarithms.
pub const MEMBERSHIP_FLOOR: f64 = 1e-12;
/// Sums at or below this are treated as zero when renormalizing.
pub const DEGENERATE_SUM: f64 = 1e-300;

/// Execution mode of the transform chain. DropRule is active only in `Train`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianMf<T> {
    pub(crate) center: T,
    pub(crate) sigma: T,
}

impl<T: Scalar> GaussianMf<T> {
    /// Widths below [`SIGMA_FLOOR`] are raised to it; non-positive or
    /// non-finite parameters are rejected.
    pub fn new(center: T, sigma: T) -> Result<Self> {
        if !center.is_finite() {
            return Err(TskError::invalid("center", "must be finite"));
        }
        if !(sigma > T::zero()) || !sigma.is_finite() {
            return Err(TskError::invalid("sigma", format!("must be positive, got {sigma}")));
        }
        Ok(Self {
            center,
            sigma: sigma.max(T::lit(SIGMA_FLOOR)),
        })
    }

    pub fn center(&self) -> T {
        self.center
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    #[inline]
    fn variance(&self) -> T {
        self.sigma * self.sigma + T::lit(GAUSS_EPS)
    }

    /// Natural log of the membership before flooring.
    #[inline]
    pub fn log_eval(&self, x: T) -> T {
        let diff = x - self.center;
        -(diff * diff) / (T::lit(2.0) * self.variance())
    }

    pub fn eval(&self, x: T) -> T {
        self.log_eval(x).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriangularMf<T> {
    pub(crate) left: T,
    pub(crate) peak: T,
    pub(crate) right: T,
}

impl<T: Scalar> TriangularMf<T> {
    pub fn new(left: T, peak: T, right: T) -> Result<Self> {
        if !(left.is_finite() && peak.is_finite() && right.is_finite()) {
            return Err(TskError::invalid("triangle", "parameters must be finite"));
        }
        if !(left < peak && peak < right) {
            return Err(TskError::invalid(
                "triangle",
                format!("require left < peak < right, got ({left}, {peak}, {right})"),
            ));
        }
        Ok(Self { left, peak, right })
    }

    pub fn left(&self) -> T {
        self.left
    }

    pub fn peak(&self) -> T {
        self.peak
    }

    pub fn right(&self) -> T {
        self.right
    }

    pub fn eval(&self, x: T) -> T {
        if x <= self.left || x >= self.right {
            T::zero()
        } else if x == self.peak {
            T::one()
        } else if x < self.peak {
            (x - self.left) / (self.peak - self.left)
        } else {
            (self.right - x) / (self.right - self.peak)
        }
    }

    /// Restores `left < peak < right` after an unconstrained update.
    pub(crate) fn project(&mut self) {
        let mut v = [self.left, self.peak, self.right];
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite triangle"));
        let gap = T::lit(1e-6);
        self.peak = v[1];
        self.left = v[0].min(v[1] - gap);
        self.right = v[2].max(v[1] + gap);
    }
}

pub fn eval_gaussian_mf<T: Scalar>(x: T, mf: &GaussianMf<T>) -> T {
    mf.eval(x)
}

pub fn eval_triangular_mf<T: Scalar>(x: T, mf: &TriangularMf<T>) -> T {
    mf.eval(x)
}

/// Premise family of an antecedent.
#[derive(Clone, Debug, PartialEq)]
pub enum AntecedentKind<T> {
    /// `R x D` Gaussian membership functions.
    GaussianGrid(Array2<GaussianMf<T>>),
    /// `R x D` triangular membership functions.
    TriangularGrid(Array2<TriangularMf<T>>),
    /// Inverse-distance memberships around fuzzy c-means centers.
    FcmInverseDistance(FcmModel<T>),
}

/// Rule premises plus the normalization mode.
#[derive(Clone, Debug, PartialEq)]
pub struct Antecedent<T> {
    pub(crate) kind: AntecedentKind<T>,
    pub htsk: bool,
}

impl<T: Scalar> Antecedent<T> {
    pub fn new(kind: AntecedentKind<T>, htsk: bool) -> Result<Self> {
        let (r, d) = match &kind {
            AntecedentKind::GaussianGrid(g) => g.dim(),
            AntecedentKind::TriangularGrid(g) => g.dim(),
            AntecedentKind::FcmInverseDistance(m) => m.centers().dim(),
        };
        if r == 0 || d == 0 {
            return Err(TskError::invalid(
                "antecedent",
                "needs at least one rule and one dimension",
            ));
        }
        Ok(Self { kind, htsk })
    }

    /// Gaussian grid from `R x D` arrays of centers and widths.
    pub fn gaussian(centers: &Array2<T>, sigmas: &Array2<T>, htsk: bool) -> Result<Self> {
        if centers.dim() != sigmas.dim() {
            return Err(TskError::ShapeMismatch {
                what: "gaussian antecedent".into(),
                detail: format!("centers {:?} vs sigmas {:?}", centers.dim(), sigmas.dim()),
            });
        }
        let mut mfs = Vec::with_capacity(centers.len());
        for (&c, &s) in centers.iter().zip(sigmas.iter()) {
            mfs.push(GaussianMf::new(c, s)?);
        }
        let grid = Array2::from_shape_vec(centers.dim(), mfs).expect("shape checked");
        Self::new(AntecedentKind::GaussianGrid(grid), htsk)
    }

    pub fn triangular(grid: Array2<TriangularMf<T>>, htsk: bool) -> Result<Self> {
        Self::new(AntecedentKind::TriangularGrid(grid), htsk)
    }

    pub fn fcm(model: FcmModel<T>) -> Result<Self> {
        Self::new(AntecedentKind::FcmInverseDistance(model), false)
    }

    pub fn kind(&self) -> &AntecedentKind<T> {
        &self.kind
    }

    pub fn n_rules(&self) -> usize {
        match &self.kind {
            AntecedentKind::GaussianGrid(g) => g.nrows(),
            AntecedentKind::TriangularGrid(g) => g.nrows(),
            AntecedentKind::FcmInverseDistance(m) => m.centers().nrows(),
        }
    }

    pub fn n_dims(&self) -> usize {
        match &self.kind {
            AntecedentKind::GaussianGrid(g) => g.ncols(),
            AntecedentKind::TriangularGrid(g) => g.ncols(),
            AntecedentKind::FcmInverseDistance(m) => m.centers().ncols(),
        }
    }

    /// Per-rule log firing levels for one input.
    pub fn log_firing_levels(&self, x: ArrayView1<'_, T>) -> Result<Array1<T>> {
        if x.len() != self.n_dims() {
            return Err(TskError::DimensionMismatch {
                expected: self.n_dims(),
                got: x.len(),
            });
        }
        let x = x.to_vec();
        let mut z = vec![T::zero(); self.n_rules()];
        self.log_firing_into(&x, &mut z);
        Ok(Array1::from(z))
    }

    /// Unchecked kernel behind [`Antecedent::log_firing_levels`].
    pub(crate) fn log_firing_into(&self, x: &[T], z: &mut [T]) {
        let floor = T::lit(MEMBERSHIP_FLOOR);
        let log_floor = floor.ln();
        match &self.kind {
            AntecedentKind::GaussianGrid(grid) => {
                for (zr, row) in z.iter_mut().zip(grid.rows()) {
                    *zr = row.iter().zip(x).map(|(mf, &xd)| mf.log_eval(xd).max(log_floor)).sum();
                }
            }
            AntecedentKind::TriangularGrid(grid) => {
                for (zr, row) in z.iter_mut().zip(grid.rows()) {
                    *zr = row.iter().zip(x).map(|(mf, &xd)| mf.eval(xd).max(floor).ln()).sum();
                }
            }
            AntecedentKind::FcmInverseDistance(model) => {
                model.membership_row(x, z);
                for zr in z.iter_mut() {
                    *zr = zr.max(T::min_positive_value()).ln();
                }
            }
        }
    }
}

/// Free-function form of [`Antecedent::log_firing_levels`].
pub fn log_firing_levels<T: Scalar>(ant: &Antecedent<T>, x: ArrayView1<'_, T>) -> Result<Array1<T>> {
    ant.log_firing_levels(x)
}

/// Softmax of `z * s` with `s = 1/D` under HTSK and `s = 1` otherwise.
pub fn normalize_firing<T: Scalar>(z: ArrayView1<'_, T>, htsk: bool, n_dims: usize) -> Array1<T> {
    let mut out = z.to_vec();
    normalize_in_place(&mut out, htsk_scale(htsk, n_dims));
    Array1::from(out)
}

pub(crate) fn htsk_scale<T: Scalar>(htsk: bool, n_dims: usize) -> T {
    if htsk {
        T::one() / T::from_usize(n_dims).expect("dimension fits scalar")
    } else {
        T::one()
    }
}

pub(crate) fn normalize_in_place<T: Scalar>(z: &mut [T], scale: T) {
    let max = z.iter().fold(T::neg_infinity(), |m, &v| m.max(v * scale));
    let mut sum = T::zero();
    for v in z.iter_mut() {
        *v = (*v * scale - max).exp();
        sum = sum + *v;
    }
    for v in z.iter_mut() {
        *v = *v / sum;
    }
}

/// One stage of the firing-level transformer.
#[derive(Clone, Debug, PartialEq)]
pub enum FlTransform<T> {
    /// Multiply by fixed nonnegative rule weights, then renormalize.
    RuleWeights(Array1<T>),
    /// Drop each rule with probability `p` during training.
    DropRule(T),
    /// Divide by the sum.
    Renormalize,
}

impl<T: Scalar> FlTransform<T> {
    pub fn rule_weights(weights: Array1<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(TskError::invalid("rule weights", "empty"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < T::zero()) {
            return Err(TskError::invalid(
                "rule weights",
                "entries must be finite and nonnegative",
            ));
        }
        if weights.iter().all(|w| *w == T::zero()) {
            return Err(TskError::invalid("rule weights", "must not all be zero"));
        }
        Ok(FlTransform::RuleWeights(weights))
    }

    pub fn drop_rule(p: T) -> Result<Self> {
        if !(p >= T::zero() && p < T::one()) {
            return Err(TskError::invalid("droprule", format!("p must lie in [0, 1), got {p}")));
        }
        Ok(FlTransform::DropRule(p))
    }
}

/// Keep-masks for every DropRule stage of a chain, aligned with the chain.
/// `None` means the stage passes its input through unchanged.
pub type FlMasks = Vec<Option<Vec<bool>>>;

/// Draws the DropRule keep-masks a chain will use for one input.
///
/// Each active DropRule stage consumes one `f64` per rule in ascending rule
/// order; rule `r` is kept when its draw is `>= p`. Stages with `p == 0` and
/// every stage in eval mode draw nothing.
pub fn sample_fl_masks<T: Scalar, R: Rng + ?Sized>(
    chain: &[FlTransform<T>],
    n_rules: usize,
    mode: Mode,
    rng: &mut R,
) -> FlMasks {
    chain
        .iter()
        .map(|t| match t {
            FlTransform::DropRule(p) if mode == Mode::Train && *p > T::zero() => {
                let p = p.as_f64();
                Some((0..n_rules).map(|_| rng.random::<f64>() >= p).collect())
            }
            _ => None,
        })
        .collect()
}

pub fn apply_fl_transforms<T: Scalar, R: Rng + ?Sized>(
    w: ArrayView1<'_, T>,
    chain: &[FlTransform<T>],
    mode: Mode,
    rng: &mut R,
) -> Result<Array1<T>> {
    let masks = sample_fl_masks(chain, w.len(), mode, rng);
    apply_fl_transforms_masked(w, chain, &masks)
}

/// Applies a chain with masks drawn beforehand by [`sample_fl_masks`].
pub fn apply_fl_transforms_masked<T: Scalar>(
    w: ArrayView1<'_, T>,
    chain: &[FlTransform<T>],
    masks: &FlMasks,
) -> Result<Array1<T>> {
    let mut trace = ChainTrace::default();
    run_chain(&w.to_vec(), chain, masks, &mut trace)?;
    Ok(Array1::from(trace.stages.pop().expect("chain output")))
}

/// Intermediate vectors of one pass through the chain, kept for backprop.
#[derive(Clone, Debug, Default)]
pub(crate) struct ChainTrace<T> {
    /// `stages[0]` is the chain input; `stages[i + 1]` the output of stage `i`.
    pub stages: Vec<Vec<T>>,
    /// Normalizer of stage `i`, or `None` when the stage was an identity.
    pub sums: Vec<Option<T>>,
}

impl<T: Scalar> ChainTrace<T> {
    pub fn output(&self) -> &[T] {
        self.stages.last().expect("chain trace is never empty")
    }
}

pub(crate) fn check_masks<T>(chain: &[FlTransform<T>], masks: &FlMasks, n_rules: usize) -> Result<()> {
    if masks.len() != chain.len() {
        return Err(TskError::ShapeMismatch {
            what: "droprule masks".into(),
            detail: format!("{} masks for {} transforms", masks.len(), chain.len()),
        });
    }
    for m in masks.iter().flatten() {
        if m.len() != n_rules {
            return Err(TskError::DimensionMismatch {
                expected: n_rules,
                got: m.len(),
            });
        }
    }
    Ok(())
}

pub(crate) fn run_chain<T: Scalar>(
    input: &[T],
    chain: &[FlTransform<T>],
    masks: &FlMasks,
    trace: &mut ChainTrace<T>,
) -> Result<()> {
    let n = input.len();
    check_masks(chain, masks, n)?;
    trace.stages.clear();
    trace.sums.clear();
    trace.stages.push(input.to_vec());
    let degenerate = |s: T| s.as_f64() <= DEGENERATE_SUM;
    for (stage, mask) in chain.iter().zip(masks) {
        let a = trace.stages.last().expect("nonempty");
        let mut u = a.clone();
        let sum = match stage {
            FlTransform::RuleWeights(weights) => {
                if weights.len() != n {
                    return Err(TskError::DimensionMismatch {
                        expected: n,
                        got: weights.len(),
                    });
                }
                for (ur, &wr) in u.iter_mut().zip(weights.iter()) {
                    *ur = *ur * wr;
                }
                let s: T = u.iter().copied().sum();
                if degenerate(s) {
                    return Err(TskError::DegenerateFiring);
                }
                Some(s)
            }
            FlTransform::DropRule(_) => match mask {
                Some(keep) => {
                    for (ur, &k) in u.iter_mut().zip(keep) {
                        if !k {
                            *ur = T::zero();
                        }
                    }
                    let s: T = u.iter().copied().sum();
                    // all rules dropped: pass through unmasked
                    if degenerate(s) {
                        u.copy_from_slice(a);
                        None
                    } else {
                        Some(s)
                    }
                }
                None => None,
            },
            FlTransform::Renormalize => {
                let s: T = u.iter().copied().sum();
                if degenerate(s) {
                    return Err(TskError::DegenerateFiring);
                }
                Some(s)
            }
        };
        if let Some(s) = sum {
            for ur in u.iter_mut() {
                *ur = *ur / s;
            }
        }
        trace.sums.push(sum);
        trace.stages.push(u);
    }
    Ok(())
}

/// Backpropagates `grad` (w.r.t. the chain output) to the chain input in
/// place. Rule-weight gradients are accumulated into `weight_grads`, one
/// slot per `RuleWeights` stage in chain order.
pub(crate) fn backprop_chain<T: Scalar>(
    chain: &[FlTransform<T>],
    masks: &FlMasks,
    trace: &ChainTrace<T>,
    grad: &mut [T],
    weight_grads: &mut [Vec<T>],
) {
    let mut weight_slot = chain
        .iter()
        .filter(|t| matches!(t, FlTransform::RuleWeights(_)))
        .count();
    for i in (0..chain.len()).rev() {
        let is_weights = matches!(chain[i], FlTransform::RuleWeights(_));
        if is_weights {
            weight_slot -= 1;
        }
        let Some(s) = trace.sums[i] else { continue };
        let a = &trace.stages[i];
        let b = &trace.stages[i + 1];
        let dot: T = grad.iter().zip(b).map(|(&g, &bv)| g * bv).sum();
        for r in 0..grad.len() {
            let gu = (grad[r] - dot) / s;
            grad[r] = match &chain[i] {
                FlTransform::RuleWeights(w) => {
                    weight_grads[weight_slot][r] = weight_grads[weight_slot][r] + gu * a[r];
                    gu * w[r]
                }
                FlTransform::DropRule(_) => {
                    let keep = masks[i].as_ref().is_none_or(|m| m[r]);
                    if keep {
                        gu
                    } else {
                        T::zero()
                    }
                }
                FlTransform::Renormalize => gu,
            };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gaussian_values() {
        let mf = GaussianMf::new(0.5, 1.0).unwrap();
        assert_eq!(mf.eval(0.5), 1.0);
        assert_abs_diff_eq!(mf.eval(1.5), (-0.5f64).exp(), epsilon = 1e-6);
        let tail = mf.eval(10.5);
        assert!(tail > 0.0);
        assert_abs_diff_eq!(tail, 1.93e-22, epsilon = 1e-24);
        let narrow = GaussianMf::new(0.0, 0.01).unwrap();
        assert_abs_diff_eq!(narrow.eval(0.01), 0.6065609839712933, epsilon = 1e-15);
        let wide = GaussianMf::new(0.0, 0.2).unwrap();
        assert_abs_diff_eq!(wide.eval(0.2), (-0.5f64).exp(), epsilon = 1e-6);
    }

    #[test]
    fn gaussian_width_guards() {
        assert!(GaussianMf::new(0.0, 0.0).is_err());
        assert!(GaussianMf::new(0.0, -1.0).is_err());
        assert!(GaussianMf::new(f64::NAN, 1.0).is_err());
        assert_eq!(GaussianMf::new(0.0, 1e-9).unwrap().sigma(), SIGMA_FLOOR);
    }

    #[test]
    fn triangular_values() {
        let mf = TriangularMf::new(0.0, 1.0, 3.0).unwrap();
        assert_eq!(mf.eval(1.0), 1.0);
        assert_eq!(mf.eval(0.0), 0.0);
        assert_eq!(mf.eval(3.0), 0.0);
        assert_eq!(mf.eval(2.0), 0.5);
        assert_eq!(mf.eval(-5.0), 0.0);
        assert_eq!(mf.eval(0.5), 0.5);
    }

    #[test]
    fn triangular_rejects_bad_order() {
        assert!(TriangularMf::new(0.0, 0.0, 1.0).is_err());
        assert!(TriangularMf::new(0.0, 2.0, 1.0).is_err());
        assert!(TriangularMf::new(1.0, 0.5, 2.0).is_err());
    }

    #[test]
    fn triangular_projection_restores_order() {
        let mut mf = TriangularMf {
            left: 1.0,
            peak: 0.0,
            right: 0.0,
        };
        mf.project();
        assert!(mf.left < mf.peak && mf.peak < mf.right);
    }

    #[test]
    fn log_firing_gaussian() {
        let ant = Antecedent::gaussian(&array![[-1.0], [1.0]], &array![[1.0], [1.0]], false).unwrap();
        let z = ant.log_firing_levels(array![0.0].view()).unwrap();
        assert_abs_diff_eq!(z[0], -0.5, epsilon = 1e-7);
        assert_abs_diff_eq!(z[1], -0.5, epsilon = 1e-7);

        let one = Antecedent::gaussian(&array![[0.3, -2.0]], &array![[0.5, 2.0]], false).unwrap();
        let z = one.log_firing_levels(array![0.3, -2.0].view()).unwrap();
        assert_abs_diff_eq!(z[0], 0.0, epsilon = 1e-7);
    }

    #[test]
    fn log_firing_triangular_clamp() {
        let grid = Array2::from_shape_vec((1, 3), vec![TriangularMf::new(0.0, 1.0, 2.0).unwrap(); 3]).unwrap();
        let ant = Antecedent::triangular(grid, false).unwrap();
        let z = ant.log_firing_levels(array![5.0, -1.0, 2.0].view()).unwrap();
        assert_abs_diff_eq!(z[0], 3.0 * MEMBERSHIP_FLOOR.ln(), epsilon = 1e-12);
    }

    #[test]
    fn log_firing_dimension_mismatch() {
        let ant = Antecedent::gaussian(&array![[0.0, 0.0]], &array![[1.0, 1.0]], false).unwrap();
        let err = ant.log_firing_levels(array![0.0].view()).unwrap_err();
        assert!(err.to_string().contains("dimension mismatch"));
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_firing(array![-3.0].view(), false, 4), array![1.0]);
        let w = normalize_firing(array![7.5, 7.5].view(), true, 3);
        assert_eq!(w, array![0.5, 0.5]);
        let w = normalize_firing(array![0.0, 3f64.ln()].view(), false, 2);
        assert_abs_diff_eq!(w[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], 0.75, epsilon = 1e-15);
        let z = array![-4.0, 1.5, 0.25];
        assert_eq!(
            normalize_firing(z.view(), true, 1),
            normalize_firing(z.view(), false, 1)
        );
    }

    #[test]
    fn htsk_softens() {
        let z = array![-10.0, -30.0];
        let plain = normalize_firing(z.view(), false, 20);
        let htsk = normalize_firing(z.view(), true, 20);
        assert!(plain[0] > 0.999);
        assert!(htsk[0] < 0.8);
    }

    #[test]
    fn chain_identity_cases() {
        let w = array![0.2, 0.3, 0.5];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = apply_fl_transforms(w.view(), &[], Mode::Train, &mut rng).unwrap();
        assert_eq!(out, w);
        let chain = vec![FlTransform::drop_rule(0.0).unwrap()];
        for mode in [Mode::Train, Mode::Eval] {
            assert_eq!(apply_fl_transforms(w.view(), &chain, mode, &mut rng).unwrap(), w);
        }
        let chain = vec![FlTransform::rule_weights(array![2.0, 2.0]).unwrap()];
        let out = apply_fl_transforms(array![0.5, 0.5].view(), &chain, Mode::Eval, &mut rng).unwrap();
        assert_eq!(out, array![0.5, 0.5]);
    }

    #[test]
    fn rule_weights_reweight() {
        let chain = vec![FlTransform::rule_weights(array![1.0, 3.0]).unwrap()];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = apply_fl_transforms(array![0.5, 0.5].view(), &chain, Mode::Eval, &mut rng).unwrap();
        assert_abs_diff_eq!(out[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(out[1], 0.75, epsilon = 1e-15);
    }

    #[test]
    fn transform_constructors_validate() {
        assert!(FlTransform::rule_weights(array![0.0, 0.0]).is_err());
        assert!(FlTransform::rule_weights(array![1.0, -0.1]).is_err());
        assert!(FlTransform::drop_rule(1.0).is_err());
        assert!(FlTransform::drop_rule(-0.1).is_err());
    }

    #[test]
    fn renormalize_degenerate() {
        let chain = vec![FlTransform::<f64>::Renormalize];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = apply_fl_transforms(array![0.0, 0.0].view(), &chain, Mode::Eval, &mut rng).unwrap_err();
        assert!(err.to_string().contains("degenerate firing"));
    }

    #[test]
    fn droprule_replays_generator() {
        let w = array![0.3, 0.7];
        let chain = vec![FlTransform::drop_rule(0.5).unwrap()];
        for seed in 0..32u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = apply_fl_transforms(w.view(), &chain, Mode::Train, &mut rng).unwrap();

            let mut replay = ChaCha8Rng::seed_from_u64(seed);
            let keep0 = replay.random::<f64>() >= 0.5;
            let keep1 = replay.random::<f64>() >= 0.5;
            let expected = match (keep0, keep1) {
                (true, false) => array![1.0, 0.0],
                (false, true) => array![0.0, 1.0],
                _ => w.clone(),
            };
            assert_eq!(out, expected, "seed {seed}");
        }
    }

    #[test]
    fn droprule_eval_is_identity() {
        let w = array![0.1, 0.2, 0.7];
        let chain = vec![FlTransform::drop_rule(0.9).unwrap()];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(apply_fl_transforms(w.view(), &chain, Mode::Eval, &mut rng).unwrap(), w);
    }
}
