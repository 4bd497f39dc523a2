use nalgebra::DMatrix;

use super::hamiltonian::excitation_images;
use super::CIVector;
use crate::error::{Error, Result};
use crate::integrals::IntegralSet;

/// Spin-summed one-body density matrix, `γ_pq = <ψ|E_pq|ψ>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rdm1 {
    pub matrix: DMatrix<f64>,
}

/// Spin-summed two-body density matrix aligned with chemists' notation:
///
/// `Γ_pqrs = Σ_στ <ψ|a†_pσ a†_rτ a_sτ a_qσ|ψ> = <E_pq E_rs> − δ_qr <E_ps>`,
///
/// so that `E = Σ γ_pq h_pq + ½ Σ Γ_pqrs (pq|rs) + e_core` holds exactly and
/// `Σ_r Γ_pqrr = (N − 1) γ_pq`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rdm2 {
    n: usize,
    data: Vec<f64>,
}

impl Rdm1 {
    pub fn n_spatial(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }
}

impl Rdm2 {
    pub fn n_spatial(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n;
        self.data[((p * n + q) * n + r) * n + s]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

pub fn compute_rdm1(psi: &CIVector) -> Rdm1 {
    let c = psi.coefficients();
    let d = excitation_images(psi.basis(), c);
    rdm1_from_images(&d, c, psi.basis().n_spatial())
}

fn rdm1_from_images(d: &DMatrix<f64>, c: &[f64], n: usize) -> Rdm1 {
    let cv = nalgebra::DVector::from_column_slice(c);
    let flat = d * cv;
    let mut matrix = DMatrix::from_fn(n, n, |p, q| flat[p * n + q]);
    matrix = (&matrix + matrix.transpose()) * 0.5;
    Rdm1 { matrix }
}

pub fn compute_rdm2(psi: &CIVector) -> Rdm2 {
    compute_rdms(psi).1
}

/// Both density matrices from one pass over the excitation images.
pub fn compute_rdms(psi: &CIVector) -> (Rdm1, Rdm2) {
    let n = psi.basis().n_spatial();
    let c = psi.coefficients();
    let d = excitation_images(psi.basis(), c);
    let rdm1 = rdm1_from_images(&d, c, n);
    // gram[(pq), (rs)] = Σ_I (E_pq c)(I) (E_rs c)(I) = <E_qp E_rs>
    let gram = &d * d.transpose();
    let mut data = vec![0.0; n.pow(4)];
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let mut x = gram[(q * n + p, r * n + s)];
                    if q == r {
                        x -= rdm1.matrix[(p, s)];
                    }
                    data[((p * n + q) * n + r) * n + s] = x;
                }
            }
        }
    }
    (rdm1, Rdm2 { n, data })
}

/// `Σ γ_ij h_ij + ½ Σ Γ_ijkl (ij|kl) + e_core`.
pub fn energy_from_rdms(r1: &Rdm1, r2: &Rdm2, integrals: &IntegralSet) -> Result<f64> {
    let n = integrals.n_spatial();
    if r1.n_spatial() != n || r2.n_spatial() != n || r1.matrix.ncols() != n {
        return Err(Error::Domain(format!(
            "density matrices over {} orbitals, integrals over {n}",
            r1.n_spatial()
        )));
    }
    let one: f64 = r1.matrix.component_mul(integrals.h()).sum();
    let two: f64 = r2
        .data
        .iter()
        .zip(integrals.v_flat())
        .map(|(g, v)| g * v)
        .sum();
    Ok(one + 0.5 * two + integrals.e_core())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fci::enumerate_basis;
    use std::sync::Arc;

    #[test]
    fn single_determinant_rdm1_is_occupation_diagonal() {
        let basis = Arc::new(enumerate_basis(3, 2, 1).unwrap());
        let det = crate::fci::Determinant::new(0b011, 0b010);
        let idx = basis.index_of(&det).unwrap();
        let mut c = vec![0.0; basis.len()];
        c[idx] = 1.0;
        let psi = CIVector::new(basis, c, 0.0).unwrap();
        let r1 = compute_rdm1(&psi);
        let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 0.0]));
        assert_eq!(r1.matrix, expected);
    }

    #[test]
    fn single_determinant_rdm2_support() {
        // two electrons in spatial orbitals 0 (alpha) and 2 (beta)
        let basis = Arc::new(enumerate_basis(3, 1, 1).unwrap());
        let idx = basis
            .index_of(&crate::fci::Determinant::new(0b001, 0b100))
            .unwrap();
        let mut c = vec![0.0; basis.len()];
        c[idx] = 1.0;
        let psi = CIVector::new(basis, c, 0.0).unwrap();
        let r2 = compute_rdm2(&psi);
        for p in 0..3 {
            for q in 0..3 {
                for r in 0..3 {
                    for s in 0..3 {
                        let x = r2.get(p, q, r, s);
                        if x != 0.0 {
                            assert!([p, q, r, s].iter().all(|i| *i == 0 || *i == 2));
                        }
                    }
                }
            }
        }
        assert_eq!(r2.get(0, 0, 2, 2), 1.0);
        assert_eq!(r2.get(2, 2, 0, 0), 1.0);
        // opposite spins: no exchange term
        assert_eq!(r2.get(0, 2, 2, 0), 0.0);
    }

    #[test]
    fn zero_integrals_give_zero_energy() {
        let basis = Arc::new(enumerate_basis(2, 1, 1).unwrap());
        let psi = CIVector::new(basis, vec![0.5; 4], 0.0).unwrap();
        let (r1, r2) = compute_rdms(&psi);
        let e = energy_from_rdms(&r1, &r2, &IntegralSet::zeros(2)).unwrap();
        assert_eq!(e, 0.0);
        assert!(energy_from_rdms(&r1, &r2, &IntegralSet::zeros(3)).is_err());
    }
}
