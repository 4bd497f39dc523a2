//! Ordinary regression schemes for the log-magnitude model, unconstrained.
//!
//! All schemes fit `y ≈ Xβ` with `y = −ln max(c², ε²)`, so `c² ≈ e^{−Xβ}` and
//! `β` is laid out like the main model's `[A, ω…]`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::ansatz::FeatureMatrix;
use crate::error::{Error, Result};
use crate::fci::CIVector;

const RIDGE: f64 = 1e-10;
const RESIDUAL_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaselineKind {
    /// Weighted least squares with `w = |c|`.
    WeightedAbs,
    /// Weighted least squares with `w = c²`.
    WeightedSquare,
    /// `w = |r|^{p−2}`
    IrlsPnorm { p: f64 },
    /// `w = 1 / max(δ, |r|)`
    IrlsCapped { delta: f64 },
    /// `w = |Xβ| / max(δ, |ln(y / Xβ)|)`
    IrlsKl { delta: f64 },
    /// Iterated OLS for the Poisson model `E[c²] = e^{Xθ}`, reported as `β = −θ`.
    Iols { delta: f64 },
}

impl BaselineKind {
    pub fn name(&self) -> &'static str {
        match self {
            BaselineKind::WeightedAbs => "weighted_abs",
            BaselineKind::WeightedSquare => "weighted_square",
            BaselineKind::IrlsPnorm { .. } => "irls_pnorm",
            BaselineKind::IrlsCapped { .. } => "irls_capped",
            BaselineKind::IrlsKl { .. } => "irls_kl",
            BaselineKind::Iols { .. } => "iols",
        }
    }

    /// Scheme by name with default hyperparameters (`p = 1`, `δ = 1e-3`, iOLS `δ = 1`).
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "weighted_abs" => BaselineKind::WeightedAbs,
            "weighted_square" => BaselineKind::WeightedSquare,
            "irls_pnorm" => BaselineKind::IrlsPnorm { p: 1.0 },
            "irls_capped" => BaselineKind::IrlsCapped { delta: 1e-3 },
            "irls_kl" => BaselineKind::IrlsKl { delta: 1e-3 },
            "iols" => BaselineKind::Iols { delta: 1.0 },
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineScheme {
    pub kind: BaselineKind,
    pub max_iter: usize,
    /// Relative coefficient change that counts as converged.
    pub tol: f64,
    pub clamp_epsilon: f64,
}

impl BaselineScheme {
    pub fn new(kind: BaselineKind) -> Self {
        BaselineScheme {
            kind,
            max_iter: 100,
            tol: 1e-8,
            clamp_epsilon: 1e-10,
        }
    }

    fn validate(&self) -> Result<()> {
        let delta = match self.kind {
            BaselineKind::IrlsCapped { delta } | BaselineKind::IrlsKl { delta } | BaselineKind::Iols { delta } => {
                Some(delta)
            }
            BaselineKind::IrlsPnorm { p } if !p.is_finite() => {
                return Err(Error::Domain("p must be finite".into()));
            }
            _ => None,
        };
        if delta.is_some_and(|d| !(d > 0.0) || !d.is_finite()) {
            return Err(Error::Domain("delta must be positive".into()));
        }
        if self.max_iter == 0 || !(self.tol > 0.0) || !(self.clamp_epsilon > 0.0) {
            return Err(Error::Domain("max_iter, tol and clamp_epsilon must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineFit {
    /// `β`, intercept first.
    pub weights: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// `Σ (y − Xβ)²` after every solve.
    pub history: Vec<f64>,
    /// A singular system was solved with a ridge term.
    pub ridge_used: bool,
}

/// Solves `min Σ w_i (x_i·β − z_i)²` through the normal equations.
fn weighted_ls(x: &DMatrix<f64>, z: &DVector<f64>, w: &DVector<f64>) -> (DVector<f64>, bool) {
    let xw = DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] * w[i]);
    let mut normal = xw.tr_mul(x);
    let rhs = xw.tr_mul(z);
    let p = normal.nrows();
    let max_diag = (0..p).map(|i| normal[(i, i)]).fold(0.0, f64::max);
    if let Some(ch) = normal.clone().cholesky() {
        let l = ch.l_dirty();
        let min_pivot = (0..p).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
        if min_pivot > 1e-12 * max_diag {
            return (ch.solve(&rhs), false);
        }
    }
    for i in 0..p {
        normal[(i, i)] += RIDGE;
    }
    let beta = match normal.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => normal
            .svd(true, true)
            .solve(&rhs, 1e-14 * max_diag.max(RIDGE))
            .unwrap_or_else(|_| DVector::zeros(p)),
    };
    (beta, true)
}

fn relative_change(new: &DVector<f64>, old: &DVector<f64>) -> f64 {
    (new - old).amax() / new.amax().max(1.0)
}

/// Fits one of the baseline schemes to `psi`.
pub fn fit_baseline(psi: &CIVector, features: &FeatureMatrix, scheme: &BaselineScheme) -> Result<BaselineFit> {
    scheme.validate()?;
    if features.n_rows() != psi.len() {
        return Err(Error::Domain(format!(
            "feature matrix has {} rows, wavefunction has {} coefficients",
            features.n_rows(),
            psi.len()
        )));
    }
    let c = psi.coefficients();
    let m = c.len();
    let x = features.dense();
    let eps2 = scheme.clamp_epsilon * scheme.clamp_epsilon;
    let y = DVector::from_iterator(m, c.iter().map(|&v| -(v * v).max(eps2).ln()));
    let rss = |beta: &DVector<f64>| (&y - &x * beta).norm_squared();

    let mut history = Vec::new();
    let mut ridge_used = false;
    let mut solve = |z: &DVector<f64>, w: &DVector<f64>, history: &mut Vec<f64>| {
        let (beta, ridge) = weighted_ls(&x, z, w);
        ridge_used |= ridge;
        history.push(rss(&beta));
        beta
    };

    let fixed_weights = match scheme.kind {
        BaselineKind::WeightedAbs => Some(DVector::from_iterator(m, c.iter().map(|v| v.abs()))),
        BaselineKind::WeightedSquare => Some(DVector::from_iterator(m, c.iter().map(|v| v * v))),
        _ => None,
    };
    if let Some(w) = fixed_weights {
        let beta = solve(&y, &w, &mut history);
        return Ok(BaselineFit {
            weights: beta.iter().copied().collect(),
            converged: true,
            iterations: 1,
            history,
            ridge_used,
        });
    }

    let ones = DVector::from_element(m, 1.0);
    let mut converged = false;
    let mut iterations = 0;
    let beta = if let BaselineKind::Iols { delta } = scheme.kind {
        // E[Y] = exp(Xθ) with Y = c²
        let yy = DVector::from_iterator(m, c.iter().map(|v| v * v));
        let mut theta = DVector::zeros(x.ncols());
        loop {
            let xt = &x * &theta;
            let ci: Vec<f64> = (0..m)
                .map(|i| {
                    let u = yy[i] * (-xt[i]).exp();
                    (delta + u).ln() - (u - 1.0) / (1.0 + delta)
                })
                .collect();
            let centre = ci.iter().sum::<f64>() / m as f64;
            let z = DVector::from_iterator(m, (0..m).map(|i| (yy[i] + delta * xt[i].exp()).ln() - centre));
            let next = solve(&z, &ones, &mut history);
            iterations += 1;
            let change = relative_change(&next, &theta);
            theta = next;
            *history.last_mut().expect("solve pushed") = rss(&-&theta);
            if !theta.iter().all(|t| t.is_finite()) {
                break;
            }
            if change < scheme.tol {
                converged = true;
                break;
            }
            if iterations >= scheme.max_iter {
                break;
            }
        }
        -theta
    } else {
        let mut beta = solve(&y, &ones, &mut history);
        iterations = 1;
        loop {
            if iterations >= scheme.max_iter {
                break;
            }
            let fit = &x * &beta;
            let w = DVector::from_iterator(
                m,
                (0..m).map(|i| {
                    let r = (y[i] - fit[i]).abs();
                    match scheme.kind {
                        BaselineKind::IrlsPnorm { p } => r.max(RESIDUAL_FLOOR).powf(p - 2.0),
                        BaselineKind::IrlsCapped { delta } => 1.0 / r.max(delta),
                        BaselineKind::IrlsKl { delta } => {
                            let ratio = y[i].abs().max(f64::MIN_POSITIVE) / fit[i].abs().max(f64::MIN_POSITIVE);
                            fit[i].abs().max(RESIDUAL_FLOOR) / ratio.ln().abs().max(delta)
                        }
                        _ => unreachable!("fixed-weight schemes return early"),
                    }
                }),
            );
            let next = solve(&y, &w, &mut history);
            iterations += 1;
            let change = relative_change(&next, &beta);
            beta = next;
            if !beta.iter().all(|b| b.is_finite()) {
                break;
            }
            if change < scheme.tol {
                converged = true;
                break;
            }
        }
        beta
    };
    Ok(BaselineFit {
        weights: beta.iter().copied().collect(),
        converged,
        iterations,
        history,
        ridge_used,
    })
}
