//! Closed-form multi-output ridge regression for TSK consequents.

use ndarray::{Array2, Array3, ArrayView2};

use crate::error::{Result, TskError};
use crate::model::Consequent;
use crate::scalar::Scalar;

/// Ridge added when an unregularized system turns out singular.
pub const SINGULAR_JITTER: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct RidgeSolution<T> {
    /// `P x out_dim` coefficients.
    pub beta: Array2<T>,
    pub alpha: T,
    /// Numerical fallbacks taken during the solve.
    pub warnings: Vec<String>,
}

/// Minimizes `|Xp b - Y|_F^2 + alpha |b|_F^2` via the normal equations.
pub fn ridge_fit<T: Scalar>(xp: ArrayView2<'_, T>, y: ArrayView2<'_, T>, alpha: T) -> Result<RidgeSolution<T>> {
    let (n, p) = xp.dim();
    if n == 0 {
        return Err(TskError::EmptyData);
    }
    if y.nrows() != n {
        return Err(TskError::ShapeMismatch {
            what: "ridge targets".into(),
            detail: format!("{} rows, design matrix has {n}", y.nrows()),
        });
    }
    if !(alpha >= T::zero()) || !alpha.is_finite() {
        return Err(TskError::invalid(
            "alpha",
            format!("must be finite and >= 0, got {alpha}"),
        ));
    }
    if xp.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(TskError::NonFinite("ridge input".into()));
    }

    let gram = xp.t().dot(&xp);
    let rhs = xp.t().dot(&y);
    let mut warnings = Vec::new();

    let mut system = gram.clone();
    for i in 0..p {
        system[[i, i]] = system[[i, i]] + alpha;
    }
    let factor = match cholesky(&system) {
        Some(l) => l,
        None if alpha == T::zero() => {
            let msg = format!("singular normal equations; added ridge {SINGULAR_JITTER:e}");
            log::warn!("{msg}");
            warnings.push(msg);
            for i in 0..p {
                system[[i, i]] = system[[i, i]] + T::lit(SINGULAR_JITTER);
            }
            cholesky(&system)
                .ok_or_else(|| TskError::invalid("design matrix", "normal equations are not positive definite"))?
        }
        None => {
            return Err(TskError::invalid(
                "design matrix",
                "normal equations are not positive definite",
            ));
        }
    };

    let mut beta = cholesky_solve(&factor, &rhs);
    // one step of iterative refinement
    let resid = &rhs - &system.dot(&beta);
    beta = beta + cholesky_solve(&factor, &resid);

    if beta.iter().any(|v| !v.is_finite()) {
        return Err(TskError::NonFinite("ridge solution".into()));
    }
    Ok(RidgeSolution { beta, alpha, warnings })
}

/// Lower-triangular Cholesky factor, or `None` when a pivot is not
/// safely positive.
fn cholesky<T: Scalar>(a: &Array2<T>) -> Option<Array2<T>> {
    let p = a.nrows();
    let max_diag = (0..p).map(|i| a[[i, i]].abs()).fold(T::zero(), T::max);
    let tol = T::from_usize(p.max(1)).expect("size") * T::epsilon() * max_diag;
    let mut l = Array2::zeros((p, p));
    for j in 0..p {
        let mut d = a[[j, j]];
        for k in 0..j {
            d = d - l[[j, k]] * l[[j, k]];
        }
        if !(d > tol) {
            return None;
        }
        let djj = d.sqrt();
        l[[j, j]] = djj;
        for i in j + 1..p {
            let mut s = a[[i, j]];
            for k in 0..j {
                s = s - l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / djj;
        }
    }
    Some(l)
}

fn cholesky_solve<T: Scalar>(l: &Array2<T>, b: &Array2<T>) -> Array2<T> {
    let p = l.nrows();
    let mut x = b.clone();
    for mut col in x.columns_mut() {
        for i in 0..p {
            let mut s = col[i];
            for k in 0..i {
                s = s - l[[i, k]] * col[k];
            }
            col[i] = s / l[[i, i]];
        }
        for i in (0..p).rev() {
            let mut s = col[i];
            for k in i + 1..p {
                s = s - l[[k, i]] * col[k];
            }
            col[i] = s / l[[i, i]];
        }
    }
    x
}

/// One-vs-rest `N x K` targets: `+1` for the true class, `-1` elsewhere.
pub fn encode_targets<T: Scalar>(labels: &[usize], n_classes: usize) -> Result<Array2<T>> {
    let mut out = Array2::from_elem((labels.len(), n_classes), -T::one());
    for (i, &l) in labels.iter().enumerate() {
        if l >= n_classes {
            return Err(TskError::LabelOutOfRange { label: l, n_classes });
        }
        out[[i, l]] = T::one();
    }
    Ok(out)
}

/// `coeffs[r][o][j] = beta[r(D+1) + j][o]`.
pub fn reshape_to_consequent<T: Scalar>(
    sol: &RidgeSolution<T>,
    n_rules: usize,
    n_dims: usize,
    out_dim: usize,
) -> Result<Consequent<T>> {
    let p = n_dims + 1;
    if sol.beta.dim() != (n_rules * p, out_dim) {
        return Err(TskError::ShapeMismatch {
            what: "ridge solution".into(),
            detail: format!("beta is {:?}, expected ({}, {out_dim})", sol.beta.dim(), n_rules * p),
        });
    }
    let coeffs = Array3::from_shape_fn((n_rules, out_dim, p), |(r, o, j)| sol.beta[[r * p + j, o]]);
    Consequent::new(coeffs)
}
