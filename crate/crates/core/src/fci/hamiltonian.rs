//! Hamiltonian action on CI vectors.
//!
//! The Hamiltonian is written as
//! `H = Σ k_pq E_pq + ½ Σ (pq|rs) E_pq E_rs + e_core` with the spin-summed
//! excitation operators `E_pq = Σ_σ a†_pσ a_qσ` and
//! `k_pq = h_pq − ½ Σ_r (pr|rq)`. `σ = H c` is assembled from the images
//! `D[rs](I) = (E_rs c)(I)`, contracted with the integrals by one matrix
//! product, then scattered back through the same excitation lists.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::strings::phase_below;
use super::DeterminantBasis;
use crate::error::{Error, Result};
use crate::integrals::IntegralSet;

/// `D[(pq), I] = (E_pq c)(I)`; one column of length `n²` per determinant.
pub(crate) fn excitation_images(basis: &DeterminantBasis, c: &[f64]) -> DMatrix<f64> {
    let n = basis.n_spatial();
    let n2 = n * n;
    let nb = basis.beta_strings().len();
    let alpha = &basis.alpha_excitations.lists;
    let beta = &basis.beta_excitations.lists;
    let mut d = DMatrix::zeros(n2, basis.len());
    d.as_mut_slice()
        .par_chunks_mut(n2)
        .enumerate()
        .for_each(|(i, col)| {
            let (ia, ib) = (i / nb, i % nb);
            // a†_p a_q |I> = s |J>  implies  <I| E_qp |J> = s
            for e in &alpha[ia] {
                col[transpose(e.pq as usize, n)] += e.sign * c[e.target as usize * nb + ib];
            }
            for e in &beta[ib] {
                col[transpose(e.pq as usize, n)] += e.sign * c[ia * nb + e.target as usize];
            }
        });
    d
}

#[inline]
fn transpose(pq: usize, n: usize) -> usize {
    (pq % n) * n + pq / n
}

/// Precomputed pieces of the Hamiltonian for one integral set and basis.
pub struct Hamiltonian<'a> {
    integrals: &'a IntegralSet,
    basis: &'a DeterminantBasis,
    k: Vec<f64>,
    v_half: DMatrix<f64>,
    diagonal: Vec<f64>,
}

impl<'a> Hamiltonian<'a> {
    pub fn new(integrals: &'a IntegralSet, basis: &'a DeterminantBasis) -> Result<Self> {
        let n = integrals.n_spatial();
        if basis.n_spatial() != n {
            return Err(Error::Domain(format!(
                "basis has {} orbitals, integrals have {n}",
                basis.n_spatial()
            )));
        }
        let n2 = n * n;
        let mut k = vec![0.0; n2];
        for p in 0..n {
            for q in 0..n {
                let exchange: f64 = (0..n).map(|r| integrals.v(p, r, r, q)).sum();
                k[p * n + q] = integrals.h()[(p, q)] - 0.5 * exchange;
            }
        }
        let v_half = DMatrix::from_row_slice(n2, n2, integrals.v_flat()) * 0.5;
        let mut ham = Hamiltonian {
            integrals,
            basis,
            k,
            v_half,
            diagonal: Vec::new(),
        };
        ham.diagonal = (0..basis.len())
            .into_par_iter()
            .map(|i| ham.diagonal_element(i))
            .collect();
        Ok(ham)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// `H x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let dim = self.basis.len();
        if x.len() != dim {
            return Err(Error::Domain(format!(
                "vector of length {} for a basis of {dim} determinants",
                x.len()
            )));
        }
        let n = self.basis.n_spatial();
        let n2 = n * n;
        let nb = self.basis.beta_strings().len();
        let d = excitation_images(self.basis, x);
        let mut g = &self.v_half * d;
        g.as_mut_slice()
            .par_chunks_mut(n2)
            .zip(x.par_iter())
            .for_each(|(col, &xi)| {
                for (gj, kj) in col.iter_mut().zip(&self.k) {
                    *gj += kj * xi;
                }
            });
        let alpha = &self.basis.alpha_excitations.lists;
        let beta = &self.basis.beta_excitations.lists;
        let e_core = self.integrals.e_core();
        let g = g.as_slice();
        let sigma = (0..dim)
            .into_par_iter()
            .map(|i| {
                let (ia, ib) = (i / nb, i % nb);
                let mut acc = e_core * x[i];
                for e in &alpha[ia] {
                    let j = e.target as usize * nb + ib;
                    acc += e.sign * g[j * n2 + transpose(e.pq as usize, n)];
                }
                for e in &beta[ib] {
                    let j = ia * nb + e.target as usize;
                    acc += e.sign * g[j * n2 + transpose(e.pq as usize, n)];
                }
                acc
            })
            .collect();
        Ok(sigma)
    }

    /// Spin-orbital one-body integral; zero between different spins.
    #[inline]
    fn h_so(&self, p: usize, q: usize) -> f64 {
        let n = self.basis.n_spatial();
        if p / n != q / n {
            return 0.0;
        }
        self.integrals.h()[(p % n, q % n)]
    }

    /// Spin-orbital `[pq|rs]` in chemists' notation.
    #[inline]
    fn v_so(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.basis.n_spatial();
        if p / n != q / n || r / n != s / n {
            return 0.0;
        }
        self.integrals.v(p % n, q % n, r % n, s % n)
    }

    fn diagonal_element(&self, index: usize) -> f64 {
        let n = self.basis.n_spatial();
        let occ = self.basis.get(index).occupied_spin_orbitals(n);
        let mut e = self.integrals.e_core();
        for &i in &occ {
            e += self.h_so(i, i);
            for &j in &occ {
                e += 0.5 * (self.v_so(i, i, j, j) - self.v_so(i, j, j, i));
            }
        }
        e
    }

    /// `<D_bra|H|D_ket>` by the Slater–Condon rules.
    pub fn matrix_element(&self, bra: usize, ket: usize) -> f64 {
        let n = self.basis.n_spatial();
        let b = self.basis.get(bra).spin_orbital_bits(n);
        let k = self.basis.get(ket).spin_orbital_bits(n);
        let diff = b ^ k;
        match diff.count_ones() {
            0 => self.diagonal[ket],
            2 => {
                let i = (k & diff).trailing_zeros() as usize;
                let a = (b & diff).trailing_zeros() as usize;
                let s1 = phase_below(k, i);
                let k1 = k ^ (1 << i);
                let sign = s1 * phase_below(k1, a);
                let mut val = self.h_so(a, i);
                let mut rest = k;
                while rest != 0 {
                    let m = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    val += self.v_so(a, i, m, m) - self.v_so(a, m, m, i);
                }
                sign * val
            }
            4 => {
                let holes = k & diff;
                let parts = b & diff;
                let i = holes.trailing_zeros() as usize;
                let j = (holes & (holes - 1)).trailing_zeros() as usize;
                let a = parts.trailing_zeros() as usize;
                let bb = (parts & (parts - 1)).trailing_zeros() as usize;
                // sign of a†_a a†_b a_j a_i |ket>
                let mut s = k;
                let mut sign = phase_below(s, i);
                s ^= 1 << i;
                sign *= phase_below(s, j);
                s ^= 1 << j;
                sign *= phase_below(s, bb);
                s |= 1 << bb;
                sign *= phase_below(s, a);
                sign * (self.v_so(a, i, bb, j) - self.v_so(a, j, bb, i))
            }
            _ => 0.0,
        }
    }

    /// Dense Hamiltonian matrix built from Slater–Condon matrix elements.
    pub fn dense_matrix(&self) -> DMatrix<f64> {
        let dim = self.basis.len();
        let mut m = DMatrix::zeros(dim, dim);
        m.as_mut_slice()
            .par_chunks_mut(dim)
            .enumerate()
            .for_each(|(ket, col)| {
                for (bra, x) in col.iter_mut().enumerate() {
                    *x = self.matrix_element(bra, ket);
                }
            });
        m
    }
}

/// `H x` for the given integrals over `basis`.
pub fn apply_hamiltonian(
    integrals: &IntegralSet,
    x: &[f64],
    basis: &DeterminantBasis,
) -> Result<Vec<f64>> {
    Hamiltonian::new(integrals, basis)?.apply(x)
}
