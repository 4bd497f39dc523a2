//! Weighted nonnegative least squares by the Lawson–Hanson active-set method.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `min_x Σ_i w_i (a_i·x − b_i)²` subject to `x ≥ 0`.
#[derive(Debug, Clone)]
pub struct NnlsProblem {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub row_weights: DVector<f64>,
}

impl NnlsProblem {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, row_weights: DVector<f64>) -> Result<Self> {
        if a.nrows() == 0 {
            return Err(Error::Domain("NNLS needs at least one row".into()));
        }
        if b.len() != a.nrows() || row_weights.len() != a.nrows() {
            return Err(Error::Domain(format!(
                "NNLS shapes disagree: a is {}x{}, b has {}, weights have {}",
                a.nrows(),
                a.ncols(),
                b.len(),
                row_weights.len()
            )));
        }
        if row_weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Domain("NNLS row weights must be finite and nonnegative".into()));
        }
        Ok(NnlsProblem { a, b, row_weights })
    }

    pub fn unweighted(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let m = a.nrows();
        Self::new(a, b, DVector::from_element(m, 1.0))
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        let r = &self.a * x - &self.b;
        r.iter()
            .zip(self.row_weights.iter())
            .map(|(r, w)| w * r * r)
            .sum()
    }

    /// Gradient of `½ Σ w_i (a_i·x − b_i)²`.
    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let r = (&self.a * x - &self.b).component_mul(&self.row_weights);
        self.a.tr_mul(&r)
    }
}

/// Solves the weighted NNLS problem.
///
/// Rows are scaled by `√w_i` and rows of zero weight are dropped. A
/// rank-deficient problem yields one of its minimizers.
pub fn solve_nnls(problem: &NnlsProblem) -> DVector<f64> {
    let p = problem.a.ncols();
    let rows: Vec<usize> = (0..problem.a.nrows())
        .filter(|&i| problem.row_weights[i] > 0.0)
        .collect();
    if rows.is_empty() || p == 0 {
        return DVector::zeros(p);
    }
    let sw: Vec<f64> = rows.iter().map(|&i| problem.row_weights[i].sqrt()).collect();
    let a = DMatrix::from_fn(rows.len(), p, |r, j| problem.a[(rows[r], j)] * sw[r]);
    let b = DVector::from_fn(rows.len(), |r, _| problem.b[rows[r]] * sw[r]);
    lawson_hanson(&a, &b)
}

fn lawson_hanson(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let (m, p) = a.shape();
    let a_norm1 = (0..p)
        .map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let tol = 10.0 * (m.max(p) as f64) * f64::EPSILON * a_norm1 * b.amax().max(1.0);

    let mut x = DVector::<f64>::zeros(p);
    let mut passive = vec![false; p];
    let mut rejected = vec![false; p];
    let max_outer = 3 * p + 10;

    for _ in 0..max_outer {
        let w = a.tr_mul(&(b - a * &x));
        let candidate = (0..p)
            .filter(|&j| !passive[j] && !rejected[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(t) = candidate else { break };
        passive[t] = true;

        let mut entered = false;
        for _ in 0..(3 * p + 10) {
            let idx: Vec<usize> = (0..p).filter(|&j| passive[j]).collect();
            let z = match solve_passive(a, b, &idx) {
                Some(z) => z,
                None => {
                    // column t is numerically dependent on the passive set
                    passive[t] = false;
                    rejected[t] = true;
                    break;
                }
            };
            if !entered {
                let zt = z[idx.iter().position(|&j| j == t).expect("t is passive")];
                if zt <= 0.0 {
                    passive[t] = false;
                    rejected[t] = true;
                    break;
                }
                entered = true;
            }
            if z.iter().all(|&v| v > 0.0) {
                for (k, &j) in idx.iter().enumerate() {
                    x[j] = z[k];
                }
                rejected.iter_mut().for_each(|r| *r = false);
                break;
            }
            let mut alpha = f64::INFINITY;
            for (k, &j) in idx.iter().enumerate() {
                if z[k] <= 0.0 {
                    let denom = x[j] - z[k];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            let alpha = if alpha.is_finite() { alpha } else { 0.0 };
            for (k, &j) in idx.iter().enumerate() {
                let old = x[j];
                x[j] += alpha * (z[k] - old);
                if z[k] <= 0.0 && x[j] <= 10.0 * f64::EPSILON * old.max(z[k].abs()) {
                    x[j] = 0.0;
                }
                if x[j] <= 0.0 {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
            rejected.iter_mut().for_each(|r| *r = false);
        }
    }
    x
}

/// Least-squares solution restricted to the columns `idx`, or `None` when
/// those columns are numerically dependent.
fn solve_passive(a: &DMatrix<f64>, b: &DVector<f64>, idx: &[usize]) -> Option<DVector<f64>> {
    let k = idx.len();
    if k == 0 || k > a.nrows() {
        return None;
    }
    let sub = a.select_columns(idx);
    let qr = sub.qr();
    let r = qr.r();
    let rmax = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if rmax == 0.0 || (0..k).any(|i| r[(i, i)].abs() <= 1e-12 * rmax) {
        return None;
    }
    let mut qtb = b.clone();
    qr.q_tr_mul(&mut qtb);
    let rhs = qtb.rows(0, k).into_owned();
    r.solve_upper_triangular(&rhs)
}
