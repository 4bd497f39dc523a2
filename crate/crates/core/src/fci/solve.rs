use std::sync::Arc;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use super::davidson::{davidson_lowest, DavidsonConfig};
use super::hamiltonian::Hamiltonian;
use super::{enumerate_basis, CIVector};
use crate::error::{Error, Result};
use crate::integrals::IntegralSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    Dense,
    Davidson,
    /// Dense up to `SolverOptions::auto_dense_limit` determinants, Davidson above.
    #[default]
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub mode: SolveMode,
    /// Largest basis dense mode accepts.
    pub dense_cap: usize,
    pub auto_dense_limit: usize,
    pub davidson: DavidsonConfig,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            mode: SolveMode::Auto,
            dense_cap: 20_000,
            auto_dense_limit: 1_500,
            davidson: DavidsonConfig::default(),
        }
    }
}

/// Lowest eigenpair of the FCI Hamiltonian.
pub fn solve_ground_state(
    integrals: &IntegralSet,
    n_alpha: usize,
    n_beta: usize,
    mode: SolveMode,
) -> Result<CIVector> {
    let options = SolverOptions {
        mode,
        ..Default::default()
    };
    solve_ground_state_with(integrals, n_alpha, n_beta, &options)
}

/// As [`solve_ground_state`] with explicit solver options.
///
/// The returned coefficients are normalized with the largest-magnitude entry
/// positive. In dense mode a degenerate ground level is resolved by picking
/// the eigenvector whose dominant determinant has the smallest index.
pub fn solve_ground_state_with(
    integrals: &IntegralSet,
    n_alpha: usize,
    n_beta: usize,
    options: &SolverOptions,
) -> Result<CIVector> {
    let basis = Arc::new(enumerate_basis(integrals.n_spatial(), n_alpha, n_beta)?);
    let ham = Hamiltonian::new(integrals, &basis)?;
    let dim = basis.len();
    let mode = match options.mode {
        SolveMode::Auto if dim <= options.auto_dense_limit.min(options.dense_cap) => SolveMode::Dense,
        SolveMode::Auto => SolveMode::Davidson,
        m => m,
    };

    let (energy, mut coefficients) = match mode {
        SolveMode::Dense => {
            if dim > options.dense_cap {
                return Err(Error::Domain(format!(
                    "dense mode limited to {} determinants, basis has {dim}",
                    options.dense_cap
                )));
            }
            dense_lowest(&ham)
        }
        _ => {
            let res = davidson_lowest(|x| ham.apply(x), ham.diagonal(), &options.davidson)?;
            (res.eigenvalue, res.eigenvector)
        }
    };
    CIVector::fix_sign(&mut coefficients);
    CIVector::new(basis, coefficients, energy)
}

fn dense_lowest(ham: &Hamiltonian<'_>) -> (f64, Vec<f64>) {
    let eig = SymmetricEigen::new(ham.dense_matrix());
    let e_min = eig.eigenvalues.min();
    let tie = 1e-10 * (1.0 + e_min.abs());
    let dominant_index = |k: usize| -> usize {
        let col = eig.eigenvectors.column(k);
        let mut best = 0;
        for i in 0..col.len() {
            if col[i].abs() > col[best].abs() + 1e-12 {
                best = i;
            }
        }
        best
    };
    let chosen = (0..eig.eigenvalues.len())
        .filter(|&k| eig.eigenvalues[k] - e_min <= tie)
        .min_by_key(|&k| (dominant_index(k), k))
        .expect("at least one eigenvalue");
    (
        eig.eigenvalues[chosen],
        eig.eigenvectors.column(chosen).iter().copied().collect(),
    )
}
