//! Natural orbitals: eigenvectors of the spin-summed one-body density matrix.

use std::cmp::Ordering;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fci::{compute_rdm1, solve_ground_state_with, CIVector, Rdm1, SolverOptions};
use crate::integrals::IntegralSet;

/// Orthogonal orbital rotation; column `k` holds natural orbital `k` expanded
/// in the original orbitals.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitalRotation {
    pub coefficients: DMatrix<f64>,
    /// Occupation numbers, descending.
    pub occupations: Vec<f64>,
}

impl OrbitalRotation {
    pub fn identity(n: usize) -> Self {
        OrbitalRotation {
            coefficients: DMatrix::identity(n, n),
            occupations: vec![0.0; n],
        }
    }

    pub fn n_spatial(&self) -> usize {
        self.coefficients.nrows()
    }
}

/// Diagonalizes `r1`.
///
/// Columns are sorted by occupation descending and each column's sign is
/// chosen so that its largest-magnitude entry is positive. Columns with equal
/// occupation (within 1e-10) are ordered by lexicographic comparison of the
/// sign-fixed vectors, larger first.
pub fn natural_orbital_basis(r1: &Rdm1) -> Result<OrbitalRotation> {
    let m = &r1.matrix;
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Domain("one-body density matrix is not square".into()));
    }
    let asym = (m - m.transpose()).amax();
    if asym > 1e-8 {
        return Err(Error::Domain(format!(
            "one-body density matrix is not symmetric (max deviation {asym:.3e})"
        )));
    }
    let eig = SymmetricEigen::new((m + m.transpose()) * 0.5);
    let mut columns: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|k| {
            let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            fix_column_sign(&mut v);
            (eig.eigenvalues[k], v)
        })
        .collect();
    columns.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && columns[start].0 - columns[end].0 <= 1e-10 {
            end += 1;
        }
        columns[start..end].sort_by(|a, b| lexicographic(&b.1, &a.1));
        start = end;
    }
    let coefficients = DMatrix::from_fn(n, n, |i, k| columns[k].1[i]);
    let occupations = columns.iter().map(|c| c.0).collect();
    Ok(OrbitalRotation {
        coefficients,
        occupations,
    })
}

fn fix_column_sign(v: &mut [f64]) {
    let mut best = 0;
    for i in 0..v.len() {
        if v[i].abs() > v[best].abs() + 1e-12 {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// One index of the two-body tensor contracted with the rotation:
/// `out[q, r, s, a] = Σ_p t[p, q, r, s] C[p, a]`. Four calls restore the
/// original index order.
fn quarter_transform(t: &[f64], c: &DMatrix<f64>, n: usize) -> Vec<f64> {
    let n3 = n * n * n;
    let mut out = vec![0.0; n3 * n];
    for qrs in 0..n3 {
        for a in 0..n {
            let mut acc = 0.0;
            for p in 0..n {
                acc += t[p * n3 + qrs] * c[(p, a)];
            }
            out[qrs * n + a] = acc;
        }
    }
    out
}

/// Rotates integrals: `h' = Cᵀ h C`, `(ab|cd)' = Σ C_ia C_jb (ij|kl) C_kc C_ld`.
///
/// The result is symmetrized over the 8 index permutations so the symmetry
/// holds exactly; the core energy is unchanged.
pub fn transform_integrals(integrals: &IntegralSet, rot: &OrbitalRotation) -> Result<IntegralSet> {
    let n = integrals.n_spatial();
    let c = &rot.coefficients;
    if c.nrows() != n || c.ncols() != n {
        return Err(Error::Domain(format!(
            "rotation is {}x{}, integrals have {n} orbitals",
            c.nrows(),
            c.ncols()
        )));
    }
    let h = c.transpose() * integrals.h() * c;
    let mut t = integrals.v_flat().to_vec();
    for _ in 0..4 {
        t = quarter_transform(&t, c, n);
    }
    let at = |p: usize, q: usize, r: usize, s: usize| t[((p * n + q) * n + r) * n + s];

    let mut out = IntegralSet::zeros(n);
    for p in 0..n {
        for q in 0..=p {
            out.set_h_symmetric(p, q, 0.5 * (h[(p, q)] + h[(q, p)]));
            let pq = p * (p + 1) / 2 + q;
            for r in 0..n {
                for s in 0..=r {
                    if r * (r + 1) / 2 + s > pq {
                        continue;
                    }
                    let sum: f64 = crate::integrals::permutations(p, q, r, s)
                        .iter()
                        .map(|&(a, b, c, d)| at(a, b, c, d))
                        .sum();
                    out.set_v_symmetric(p, q, r, s, sum / 8.0);
                }
            }
        }
    }
    out.set_e_core(integrals.e_core());
    Ok(out)
}

/// Output of the natural-orbital procedure.
#[derive(Debug, Clone)]
pub struct NaturalOrbitalSolution {
    /// Ground state in the original orbitals.
    pub reference: CIVector,
    /// Ground state re-solved in the natural-orbital basis.
    pub psi: CIVector,
    pub integrals: IntegralSet,
    pub rotation: OrbitalRotation,
}

/// Solve, build the 1-RDM, rotate to natural orbitals and solve again.
pub fn no_pipeline(
    integrals: &IntegralSet,
    n_alpha: usize,
    n_beta: usize,
    options: &SolverOptions,
) -> Result<NaturalOrbitalSolution> {
    let reference = solve_ground_state_with(integrals, n_alpha, n_beta, options)?;
    let rdm1 = compute_rdm1(&reference);
    let rotation = natural_orbital_basis(&rdm1)?;
    let rotated = transform_integrals(integrals, &rotation)?;
    let psi = solve_ground_state_with(&rotated, n_alpha, n_beta, options)?;
    Ok(NaturalOrbitalSolution {
        reference,
        psi,
        integrals: rotated,
        rotation,
    })
}
