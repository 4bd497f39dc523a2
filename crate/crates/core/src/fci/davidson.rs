//! Davidson iteration for the lowest eigenpair of a symmetric operator.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DavidsonConfig {
    /// Convergence threshold on the residual 2-norm.
    pub tolerance: f64,
    pub max_subspace: usize,
    pub max_iterations: usize,
}

impl Default for DavidsonConfig {
    fn default() -> Self {
        DavidsonConfig {
            tolerance: 1e-9,
            max_subspace: 30,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DavidsonResult {
    pub eigenvalue: f64,
    pub eigenvector: Vec<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Orthogonalizes `v` against `basis` twice (classical Gram–Schmidt with
/// reorthogonalization) and normalizes it. Returns the norm before
/// normalization.
fn orthonormalize(v: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let proj = dot(v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
        }
    }
    normalize(v)
}

/// Lowest eigenpair of the operator `apply`, whose diagonal is `diagonal`.
///
/// The search starts from the unit vector on the smallest diagonal entry
/// (first index on ties) and uses the diagonal as preconditioner.
pub fn davidson_lowest<F>(apply: F, diagonal: &[f64], config: &DavidsonConfig) -> Result<DavidsonResult>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let dim = diagonal.len();
    if dim == 0 {
        return Err(Error::Domain("empty operator".into()));
    }
    let max_subspace = config.max_subspace.clamp(2, dim.max(2));
    let seed = diagonal
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut start = vec![0.0; dim];
    start[seed] = 1.0;

    let mut vs: Vec<Vec<f64>> = vec![start.clone()];
    let mut avs: Vec<Vec<f64>> = vec![apply(&start)?];
    let mut previous: Option<Vec<f64>> = None;
    let mut residual_norm = f64::INFINITY;

    for iteration in 0..=config.max_iterations {
        let m = vs.len();
        let t = DMatrix::from_fn(m, m, |i, j| dot(&vs[i], &avs[j]));
        let t = (&t + t.transpose()) * 0.5;
        let eig = SymmetricEigen::new(t);
        let lowest = (0..m)
            .min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
            .expect("nonempty subspace");
        let theta = eig.eigenvalues[lowest];
        let y = eig.eigenvectors.column(lowest);

        let mut x = vec![0.0; dim];
        let mut ax = vec![0.0; dim];
        for k in 0..m {
            let yk = y[k];
            x.iter_mut().zip(&vs[k]).for_each(|(a, b)| *a += yk * b);
            ax.iter_mut().zip(&avs[k]).for_each(|(a, b)| *a += yk * b);
        }
        let residual: Vec<f64> = ax.iter().zip(&x).map(|(a, b)| a - theta * b).collect();
        residual_norm = dot(&residual, &residual).sqrt();
        if residual_norm <= config.tolerance {
            let norm = normalize(&mut x);
            debug_assert!(norm > 0.0);
            return Ok(DavidsonResult {
                eigenvalue: theta,
                eigenvector: x,
                iterations: iteration,
                residual_norm,
            });
        }
        if iteration == config.max_iterations {
            break;
        }

        let mut correction: Vec<f64> = residual
            .iter()
            .zip(diagonal)
            .map(|(r, d)| {
                let denom = theta - d;
                let denom = if denom.abs() < 1e-8 {
                    1e-8f64.copysign(denom)
                } else {
                    denom
                };
                r / denom
            })
            .collect();

        if m >= max_subspace {
            // Collapse onto the current Ritz vector and the previous one.
            let mut restart = vec![x.clone()];
            normalize(&mut restart[0]);
            if let Some(mut prev) = previous.take() {
                if orthonormalize(&mut prev, &restart) > 1e-6 {
                    restart.push(prev);
                }
            }
            avs = restart.iter().map(|v| apply(v)).collect::<Result<_>>()?;
            vs = restart;
        }
        previous = Some(x);

        let mut norm = orthonormalize(&mut correction, &vs);
        if norm < 1e-12 {
            // Preconditioned residual lies in the subspace; use the raw residual.
            correction = residual;
            norm = orthonormalize(&mut correction, &vs);
            if norm < 1e-14 {
                break;
            }
        }
        avs.push(apply(&correction)?);
        vs.push(correction);
    }
    Err(Error::Convergence {
        iterations: config.max_iterations,
        residual: residual_norm,
    })
}
