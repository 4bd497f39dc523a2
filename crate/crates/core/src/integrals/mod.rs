//! One- and two-electron integrals defining a second-quantized Hamiltonian.
//!
//! The two-body tensor is stored in chemists' notation, `v[p][q][r][s] = (pq|rs)`,
//! and carries the full 8-fold permutational symmetry of real orbitals.

mod fcidump;
mod hubbard;

pub use fcidump::{read_fcidump, write_fcidump, Fcidump};
pub use hubbard::{build_hubbard, Boundary, HubbardSpec};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Hamiltonian integrals over `n_spatial` real spatial orbitals (Hartree).
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralSet {
    n_spatial: usize,
    h: DMatrix<f64>,
    v: Vec<f64>,
    e_core: f64,
}

impl IntegralSet {
    /// Builds an integral set, checking exact symmetry and finiteness.
    pub fn new(h: DMatrix<f64>, v: Vec<f64>, e_core: f64) -> Result<Self> {
        let n = h.nrows();
        if h.ncols() != n {
            return Err(Error::Domain(format!(
                "one-body matrix is {}x{}, expected square",
                h.nrows(),
                h.ncols()
            )));
        }
        if v.len() != n.pow(4) {
            return Err(Error::Domain(format!(
                "two-body tensor has {} entries, expected {}",
                v.len(),
                n.pow(4)
            )));
        }
        if !e_core.is_finite() || h.iter().chain(v.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Domain("integrals contain non-finite entries".into()));
        }
        for p in 0..n {
            for q in 0..p {
                if h[(p, q)] != h[(q, p)] {
                    return Err(Error::Domain(format!("h[{p}][{q}] != h[{q}][{p}]")));
                }
            }
        }
        let set = IntegralSet {
            n_spatial: n,
            h,
            v,
            e_core,
        };
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let x = set.v(p, q, r, s);
                        for (a, b, c, d) in permutations(p, q, r, s) {
                            if set.v(a, b, c, d) != x {
                                return Err(Error::Domain(format!(
                                    "two-body tensor breaks symmetry at ({p}{q}|{r}{s})"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(set)
    }

    /// All-zero integrals over `n_spatial` orbitals.
    pub fn zeros(n_spatial: usize) -> Self {
        IntegralSet {
            n_spatial,
            h: DMatrix::zeros(n_spatial, n_spatial),
            v: vec![0.0; n_spatial.pow(4)],
            e_core: 0.0,
        }
    }

    pub fn n_spatial(&self) -> usize {
        self.n_spatial
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    /// `(pq|rs)`.
    #[inline]
    pub fn v(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.v[self.index(p, q, r, s)]
    }

    /// Flat two-body tensor, row-major in `(p, q, r, s)`.
    pub fn v_flat(&self) -> &[f64] {
        &self.v
    }

    pub fn e_core(&self) -> f64 {
        self.e_core
    }

    #[inline]
    fn index(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        let n = self.n_spatial;
        ((p * n + q) * n + r) * n + s
    }

    /// Writes `value` to `(pq|rs)` and all of its symmetry partners.
    pub(crate) fn set_v_symmetric(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) {
        for (a, b, c, d) in permutations(p, q, r, s) {
            let i = self.index(a, b, c, d);
            self.v[i] = value;
        }
    }

    pub(crate) fn set_h_symmetric(&mut self, p: usize, q: usize, value: f64) {
        self.h[(p, q)] = value;
        self.h[(q, p)] = value;
    }

    pub(crate) fn set_e_core(&mut self, value: f64) {
        self.e_core = value;
    }

    /// Largest deviation of the two-body tensor from 8-fold symmetry.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n_spatial;
        let mut worst = 0.0f64;
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let x = self.v(p, q, r, s);
                        for (a, b, c, d) in permutations(p, q, r, s) {
                            worst = worst.max((self.v(a, b, c, d) - x).abs());
                        }
                    }
                }
            }
        }
        let h = &self.h;
        worst.max((h - h.transpose()).amax())
    }
}

/// The eight index orderings equivalent to `(pq|rs)` for real orbitals.
#[inline]
pub(crate) fn permutations(
    p: usize,
    q: usize,
    r: usize,
    s: usize,
) -> [(usize, usize, usize, usize); 8] {
    [
        (p, q, r, s),
        (q, p, r, s),
        (p, q, s, r),
        (q, p, s, r),
        (r, s, p, q),
        (s, r, p, q),
        (r, s, q, p),
        (s, r, q, p),
    ]
}
