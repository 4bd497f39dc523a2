//! Full configuration interaction over a determinant basis.
//!
//! Determinants are pairs of alpha/beta occupation bitstrings over the same
//! spatial orbitals. The canonical order is lexicographic in
//! `(alpha, beta)`, comparing the bit patterns as integers, so the flat index
//! of a determinant is `alpha_index * n_beta_strings + beta_index`.
//!
//! Fermionic phases follow the operator ordering "all alpha spin-orbitals
//! ascending, then all beta spin-orbitals ascending".

mod davidson;
mod hamiltonian;
mod rdm;
mod solve;
pub(crate) mod strings;

pub use davidson::{davidson_lowest, DavidsonConfig, DavidsonResult};
pub use hamiltonian::{apply_hamiltonian, Hamiltonian};
pub use rdm::{compute_rdm1, compute_rdm2, compute_rdms, energy_from_rdms, Rdm1, Rdm2};
pub use solve::{solve_ground_state, solve_ground_state_with, SolveMode, SolverOptions};

use std::sync::Arc;

use strings::{enumerate_strings, ExcitationTable};

use crate::error::{Error, Result};

/// Largest number of spatial orbitals a determinant can hold.
pub const MAX_SPATIAL_ORBITALS: usize = 32;

/// Occupations of one Slater determinant; bit `p` set means spatial orbital
/// `p` is occupied in that spin channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Determinant {
    pub alpha_occ: u64,
    pub beta_occ: u64,
}

impl Determinant {
    pub fn new(alpha_occ: u64, beta_occ: u64) -> Self {
        Determinant {
            alpha_occ,
            beta_occ,
        }
    }

    /// Spin-orbital occupation bits: alpha orbitals `0..n`, beta `n..2n`.
    pub fn spin_orbital_bits(&self, n_spatial: usize) -> u64 {
        self.alpha_occ | (self.beta_occ << n_spatial)
    }

    /// Occupied spin-orbital indices in ascending order.
    pub fn occupied_spin_orbitals(&self, n_spatial: usize) -> Vec<usize> {
        let bits = self.spin_orbital_bits(n_spatial);
        (0..2 * n_spatial).filter(|&i| bits & (1 << i) != 0).collect()
    }

    pub fn n_electrons(&self) -> usize {
        (self.alpha_occ.count_ones() + self.beta_occ.count_ones()) as usize
    }
}

/// The full determinant space for fixed alpha and beta electron counts.
#[derive(Debug, Clone)]
pub struct DeterminantBasis {
    n_spatial: usize,
    n_alpha: usize,
    n_beta: usize,
    alpha_strings: Vec<u64>,
    beta_strings: Vec<u64>,
    pub(crate) alpha_excitations: ExcitationTable,
    pub(crate) beta_excitations: ExcitationTable,
}

impl PartialEq for DeterminantBasis {
    fn eq(&self, other: &Self) -> bool {
        self.n_spatial == other.n_spatial
            && self.n_alpha == other.n_alpha
            && self.n_beta == other.n_beta
    }
}

/// Enumerates `C(n_spatial, n_alpha) * C(n_spatial, n_beta)` determinants in
/// canonical order.
pub fn enumerate_basis(n_spatial: usize, n_alpha: usize, n_beta: usize) -> Result<DeterminantBasis> {
    if n_spatial == 0 || n_spatial > MAX_SPATIAL_ORBITALS {
        return Err(Error::Domain(format!(
            "number of spatial orbitals must be in 1..={MAX_SPATIAL_ORBITALS}, got {n_spatial}"
        )));
    }
    if n_alpha > n_spatial || n_beta > n_spatial {
        return Err(Error::Domain(format!(
            "cannot place {n_alpha} alpha and {n_beta} beta electrons in {n_spatial} orbitals"
        )));
    }
    let alpha_strings = enumerate_strings(n_spatial, n_alpha);
    let beta_strings = enumerate_strings(n_spatial, n_beta);
    Ok(DeterminantBasis {
        n_spatial,
        n_alpha,
        n_beta,
        alpha_excitations: ExcitationTable::new(n_spatial, &alpha_strings),
        beta_excitations: ExcitationTable::new(n_spatial, &beta_strings),
        alpha_strings,
        beta_strings,
    })
}

impl DeterminantBasis {
    pub fn n_spatial(&self) -> usize {
        self.n_spatial
    }

    pub fn n_alpha(&self) -> usize {
        self.n_alpha
    }

    pub fn n_beta(&self) -> usize {
        self.n_beta
    }

    pub fn n_electrons(&self) -> usize {
        self.n_alpha + self.n_beta
    }

    pub fn len(&self) -> usize {
        self.alpha_strings.len() * self.beta_strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn alpha_strings(&self) -> &[u64] {
        &self.alpha_strings
    }

    pub fn beta_strings(&self) -> &[u64] {
        &self.beta_strings
    }

    pub fn get(&self, index: usize) -> Determinant {
        let nb = self.beta_strings.len();
        Determinant::new(self.alpha_strings[index / nb], self.beta_strings[index % nb])
    }

    pub fn index_of(&self, det: &Determinant) -> Option<usize> {
        let ia = self.alpha_strings.binary_search(&det.alpha_occ).ok()?;
        let ib = self.beta_strings.binary_search(&det.beta_occ).ok()?;
        Some(ia * self.beta_strings.len() + ib)
    }

    pub fn iter(&self) -> impl Iterator<Item = Determinant> + '_ {
        self.alpha_strings.iter().flat_map(move |&a| {
            self.beta_strings
                .iter()
                .map(move |&b| Determinant::new(a, b))
        })
    }

    pub fn determinants(&self) -> Vec<Determinant> {
        self.iter().collect()
    }
}

/// Normalized CI expansion over a shared determinant basis.
#[derive(Debug, Clone)]
pub struct CIVector {
    basis: Arc<DeterminantBasis>,
    coefficients: Vec<f64>,
    energy: f64,
}

impl CIVector {
    /// Normalizes `coefficients` to unit length.
    pub fn new(basis: Arc<DeterminantBasis>, coefficients: Vec<f64>, energy: f64) -> Result<Self> {
        if coefficients.len() != basis.len() {
            return Err(Error::Domain(format!(
                "{} coefficients for a basis of {} determinants",
                coefficients.len(),
                basis.len()
            )));
        }
        let norm = coefficients.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Domain("CI vector has zero or non-finite norm".into()));
        }
        let coefficients = coefficients.into_iter().map(|c| c / norm).collect();
        Ok(CIVector {
            basis,
            coefficients,
            energy,
        })
    }

    pub fn basis(&self) -> &Arc<DeterminantBasis> {
        &self.basis
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn with_energy(mut self, energy: f64) -> Self {
        self.energy = energy;
        self
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Flips the global sign so the largest-magnitude coefficient is positive.
    pub(crate) fn fix_sign(coefficients: &mut [f64]) {
        let mut best = 0;
        for (i, c) in coefficients.iter().enumerate() {
            if c.abs() > coefficients[best].abs() {
                best = i;
            }
        }
        if coefficients.get(best).is_some_and(|&c| c < 0.0) {
            coefficients.iter_mut().for_each(|c| *c = -*c);
        }
    }

    /// Indices of the `count` largest-magnitude coefficients, largest first.
    pub fn dominant(&self, count: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| {
            self.coefficients[b]
                .abs()
                .total_cmp(&self.coefficients[a].abs())
                .then(a.cmp(&b))
        });
        idx.truncate(count);
        idx
    }
}
