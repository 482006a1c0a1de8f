//! Fuzzy c-means clustering and the clustering-plus-ridge fitting path.
//!
//! Memberships follow the inverse-distance rule
//! `u_nr = 1 / sum_k (d_nr / d_nk)^(2/(m-1))`, evaluated as a softmax of
//! `-(2/(m-1)) ln d` so that large exponents cannot overflow. A sample that
//! sits on a center (distance below [`HIT_DISTANCE`]) belongs to that
//! center alone.

use ndarray::{Array1, Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, TskError};
use crate::membership::{Antecedent, GaussianMf, SIGMA_FLOOR};
use crate::model::{Consequent, InputTransform, Targets, Task, TskModel};
use crate::ridge::{encode_targets, reshape_to_consequent, ridge_fit};
use crate::scalar::Scalar;

/// Distances below this count as an exact hit on a center.
pub const HIT_DISTANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct FcmConfig<T> {
    pub n_clusters: usize,
    pub fuzzifier: T,
    pub tol: T,
    pub max_iter: usize,
    pub seed: u64,
}

impl<T: Scalar> FcmConfig<T> {
    /// Defaults: `m = 2`, `tol = 1e-5`, `max_iter = 200`.
    pub fn new(n_clusters: usize, seed: u64) -> Self {
        Self {
            n_clusters,
            fuzzifier: T::lit(2.0),
            tol: T::lit(1e-5),
            max_iter: 200,
            seed,
        }
    }

    pub fn with_fuzzifier(mut self, m: T) -> Result<Self> {
        self.fuzzifier = m;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_clusters == 0 {
            return Err(TskError::invalid("n_clusters", "must be at least 1"));
        }
        if !(self.fuzzifier > T::one()) || !self.fuzzifier.is_finite() {
            return Err(TskError::invalid(
                "fuzzifier",
                format!("must be > 1, got {}", self.fuzzifier),
            ));
        }
        if !(self.tol > T::zero()) {
            return Err(TskError::invalid("tol", "must be positive"));
        }
        if self.max_iter == 0 {
            return Err(TskError::invalid("max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

/// Fitted cluster centers and the fuzzifier they were fitted with.
#[derive(Clone, Debug, PartialEq)]
pub struct FcmModel<T> {
    centers: Array2<T>,
    fuzzifier: T,
}

impl<T: Scalar> FcmModel<T> {
    pub fn new(centers: Array2<T>, fuzzifier: T) -> Result<Self> {
        if centers.nrows() == 0 || centers.ncols() == 0 {
            return Err(TskError::invalid(
                "centers",
                "need at least one center and one dimension",
            ));
        }
        if centers.iter().any(|c| !c.is_finite()) {
            return Err(TskError::NonFinite("centers".into()));
        }
        if !(fuzzifier > T::one()) || !fuzzifier.is_finite() {
            return Err(TskError::invalid("fuzzifier", format!("must be > 1, got {fuzzifier}")));
        }
        Ok(Self { centers, fuzzifier })
    }

    pub fn centers(&self) -> &Array2<T> {
        &self.centers
    }

    pub fn fuzzifier(&self) -> T {
        self.fuzzifier
    }

    pub fn n_clusters(&self) -> usize {
        self.centers.nrows()
    }

    /// Memberships of one sample; `out` has one slot per center.
    pub(crate) fn membership_row(&self, x: &[T], out: &mut [T]) {
        membership_row(self.centers.view(), self.fuzzifier, x, out);
    }

    fn check_dim(&self, x: ArrayView2<'_, T>) -> Result<()> {
        if x.ncols() != self.centers.ncols() {
            return Err(TskError::DimensionMismatch {
                expected: self.centers.ncols(),
                got: x.ncols(),
            });
        }
        Ok(())
    }
}

fn membership_row<T: Scalar>(centers: ArrayView2<'_, T>, m: T, x: &[T], out: &mut [T]) {
    let hit = T::lit(HIT_DISTANCE);
    let mut nearest = 0;
    for (r, c) in centers.rows().into_iter().enumerate() {
        let d2: T = c.iter().zip(x).map(|(&a, &b)| (a - b) * (a - b)).sum();
        out[r] = d2.sqrt();
        if out[r] < out[nearest] {
            nearest = r;
        }
    }
    if out[nearest] < hit {
        out.iter_mut().for_each(|u| *u = T::zero());
        out[nearest] = T::one();
        return;
    }
    let expo = T::lit(2.0) / (m - T::one());
    for u in out.iter_mut() {
        *u = -expo * u.max(hit).ln();
    }
    crate::membership::normalize_in_place(out, T::one());
}

fn memberships<T: Scalar>(centers: ArrayView2<'_, T>, m: T, x: ArrayView2<'_, T>) -> Array2<T> {
    let mut u = Array2::zeros((x.nrows(), centers.nrows()));
    let mut row = vec![T::zero(); x.ncols()];
    for (xi, mut ui) in x.rows().into_iter().zip(u.rows_mut()) {
        row.iter_mut().zip(xi.iter()).for_each(|(a, &b)| *a = b);
        membership_row(centers, m, &row, ui.as_slice_mut().expect("row-major"));
    }
    u
}

fn objective<T: Scalar>(x: ArrayView2<'_, T>, centers: ArrayView2<'_, T>, u: &Array2<T>, m: T) -> T {
    let mut j = T::zero();
    for (xi, ui) in x.rows().into_iter().zip(u.rows()) {
        for (c, &unr) in centers.rows().into_iter().zip(ui.iter()) {
            if unr == T::zero() {
                continue;
            }
            let d2: T = c.iter().zip(xi.iter()).map(|(&a, &b)| (a - b) * (a - b)).sum();
            j = j + unr.powf(m) * d2;
        }
    }
    j
}

/// `D^2`-weighted farthest-point seeding: the first seed is uniform, every
/// later seed is drawn with probability proportional to its squared
/// distance from the nearest seed chosen so far.
pub(crate) fn seed_centers<T: Scalar>(x: ArrayView2<'_, T>, k: usize, rng: &mut ChaCha8Rng) -> Array2<T> {
    let n = x.nrows();
    let mut centers = Array2::zeros((k, x.ncols()));
    let first = rng.random_range(0..n);
    centers.row_mut(0).assign(&x.row(first));
    let mut nearest: Vec<f64> = x
        .rows()
        .into_iter()
        .map(|xi| sq_dist(xi.iter(), x.row(first).iter()))
        .collect();
    for c in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &d) in nearest.iter().enumerate() {
                acc += d;
                if acc > target && d > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centers.row_mut(c).assign(&x.row(pick));
        for (i, xi) in x.rows().into_iter().enumerate() {
            nearest[i] = nearest[i].min(sq_dist(xi.iter(), x.row(pick).iter()));
        }
    }
    centers
}

fn sq_dist<'a, T: Scalar>(a: impl Iterator<Item = &'a T>, b: impl Iterator<Item = &'a T>) -> f64 {
    a.zip(b).map(|(&p, &q)| ((p - q) * (p - q)).as_f64()).sum()
}

pub(crate) fn check_finite<T: Scalar>(x: ArrayView2<'_, T>, what: &str) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(TskError::NonFinite(what.into()));
    }
    Ok(())
}

/// Result of [`fcm_fit`].
#[derive(Clone, Debug)]
pub struct FcmFit<T> {
    pub model: FcmModel<T>,
    /// `N x R` memberships at convergence.
    pub memberships: Array2<T>,
    /// Objective value after each iteration.
    pub objective_trace: Vec<T>,
}

pub fn fcm_fit<T: Scalar>(x: ArrayView2<'_, T>, cfg: &FcmConfig<T>) -> Result<FcmFit<T>> {
    cfg.validate()?;
    let (n, d) = x.dim();
    if n < cfg.n_clusters {
        return Err(TskError::TooFewSamples {
            n_samples: n,
            n_rules: cfg.n_clusters,
        });
    }
    if d == 0 {
        return Err(TskError::invalid("data", "no feature columns"));
    }
    check_finite(x, "data")?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let centers = seed_centers(x, cfg.n_clusters, &mut rng);
    iterate(x, cfg, centers)
}

/// Runs the alternating updates from caller-supplied initial centers
/// (`cfg.n_clusters x D`); `cfg.seed` is not used.
pub fn fcm_fit_from<T: Scalar>(x: ArrayView2<'_, T>, cfg: &FcmConfig<T>, init: Array2<T>) -> Result<FcmFit<T>> {
    cfg.validate()?;
    if init.dim() != (cfg.n_clusters, x.ncols()) {
        return Err(TskError::ShapeMismatch {
            what: "initial centers".into(),
            detail: format!("{:?}, expected ({}, {})", init.dim(), cfg.n_clusters, x.ncols()),
        });
    }
    if x.nrows() == 0 {
        return Err(TskError::EmptyData);
    }
    check_finite(x, "data")?;
    check_finite(init.view(), "initial centers")?;
    iterate(x, cfg, init)
}

fn iterate<T: Scalar>(x: ArrayView2<'_, T>, cfg: &FcmConfig<T>, mut centers: Array2<T>) -> Result<FcmFit<T>> {
    let d = x.ncols();
    let m = cfg.fuzzifier;
    let mut u = memberships(centers.view(), m, x);
    let mut trace = Vec::new();

    for _ in 0..cfg.max_iter {
        for (r, mut c) in centers.rows_mut().into_iter().enumerate() {
            let mut total = T::zero();
            let mut acc = Array1::<T>::zeros(d);
            for (xi, &unr) in x.rows().into_iter().zip(u.column(r).iter()) {
                if unr == T::zero() {
                    continue;
                }
                let w = unr.powf(m);
                total = total + w;
                acc.scaled_add(w, &xi);
            }
            // an empty cluster keeps its previous center
            if total > T::zero() {
                c.assign(&(acc / total));
            }
        }
        let next = memberships(centers.view(), m, x);
        trace.push(objective(x, centers.view(), &next, m));
        let delta = next
            .iter()
            .zip(u.iter())
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()));
        u = next;
        if delta < cfg.tol {
            break;
        }
    }

    Ok(FcmFit {
        model: FcmModel::new(centers, m)?,
        memberships: u,
        objective_trace: trace,
    })
}

/// `N x R` memberships of new samples.
pub fn fcm_membership<T: Scalar>(model: &FcmModel<T>, x: ArrayView2<'_, T>) -> Result<Array2<T>> {
    model.check_dim(x)?;
    Ok(memberships(model.centers.view(), model.fuzzifier, x))
}

/// Consequent design matrix: block `r` of row `n` is `u_nr [1, x_n]`.
pub fn fcm_transform<T: Scalar>(model: &FcmModel<T>, x: ArrayView2<'_, T>) -> Result<Array2<T>> {
    let u = fcm_membership(model, x)?;
    Ok(design_matrix(&u, x))
}

pub(crate) fn design_matrix<T: Scalar>(u: &Array2<T>, x: ArrayView2<'_, T>) -> Array2<T> {
    let (n, d) = x.dim();
    let r = u.ncols();
    let p = d + 1;
    let mut out = Array2::zeros((n, r * p));
    for i in 0..n {
        for k in 0..r {
            let unr = u[[i, k]];
            out[[i, k * p]] = unr;
            for j in 0..d {
                out[[i, k * p + 1 + j]] = unr * x[[i, j]];
            }
        }
    }
    out
}

/// Gaussian grid whose widths are the membership-weighted spreads of each
/// cluster, scaled by `h`. Widths are floored at
/// `max(1e-4, 0.01 std(X_d))`.
pub fn antecedent_from_fcm<T: Scalar>(model: &FcmModel<T>, x: ArrayView2<'_, T>, h: T) -> Result<Antecedent<T>> {
    if !(h > T::zero()) {
        return Err(TskError::invalid("h", "must be positive"));
    }
    let u = fcm_membership(model, x)?;
    let (n, d) = x.dim();
    if n == 0 {
        return Err(TskError::EmptyData);
    }
    let m = model.fuzzifier;
    let nf = T::from_usize(n).expect("row count");
    let floors: Vec<T> = x
        .columns()
        .into_iter()
        .map(|col| {
            let mean = col.sum() / nf;
            let var = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / nf;
            T::lit(SIGMA_FLOOR).max(T::lit(0.01) * var.sqrt())
        })
        .collect();
    let centers = &model.centers;
    let mut mfs = Vec::with_capacity(centers.len());
    for r in 0..centers.nrows() {
        let weights: Vec<T> = u.column(r).iter().map(|&v| v.powf(m)).collect();
        let total: T = weights.iter().copied().sum();
        for dd in 0..d {
            let c = centers[[r, dd]];
            let spread = if total > T::zero() {
                let s: T = weights
                    .iter()
                    .zip(x.column(dd).iter())
                    .map(|(&w, &v)| w * (v - c) * (v - c))
                    .sum();
                h * (s / total).sqrt()
            } else {
                T::zero()
            };
            mfs.push(GaussianMf::new(c, spread.max(floors[dd]))?);
        }
    }
    let grid = Array2::from_shape_vec(centers.dim(), mfs).expect("R x D");
    Antecedent::new(crate::membership::AntecedentKind::GaussianGrid(grid), false)
}

/// Clusters `x`, fits ridge consequents on the design matrix and assembles
/// a model whose eval-mode forward reproduces the design-matrix prediction.
pub fn fit_fcm_pipeline<T: Scalar>(
    x: ArrayView2<'_, T>,
    targets: &Targets<T>,
    cfg: &FcmConfig<T>,
    alpha: T,
) -> Result<TskModel<T>> {
    if targets.len() != x.nrows() {
        return Err(TskError::ShapeMismatch {
            what: "targets".into(),
            detail: format!("{} targets for {} samples", targets.len(), x.nrows()),
        });
    }
    let fit = fcm_fit(x, cfg)?;
    let design = design_matrix(&fit.memberships, x);
    let y = match targets {
        Targets::Labels { labels, n_classes } => {
            if *n_classes < 2 {
                return Err(TskError::invalid(
                    "n_classes",
                    "classification needs at least two classes",
                ));
            }
            encode_targets(labels, *n_classes)?
        }
        Targets::Values(y) => {
            check_finite(y.view(), "targets")?;
            y.clone()
        }
    };
    let sol = ridge_fit(design.view(), y.view(), alpha)?;
    let (r, d) = (fit.model.n_clusters(), x.ncols());
    let consequent: Consequent<T> = reshape_to_consequent(&sol, r, d, y.ncols())?;
    let task: Task = targets.task();
    TskModel::new(
        Antecedent::fcm(fit.model)?,
        Vec::new(),
        InputTransform::Identity,
        consequent,
        task,
    )
}
