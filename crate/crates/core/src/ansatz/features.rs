use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fci::DeterminantBasis;

/// Occupation-product features of order ≤ k.
///
/// Column 0 is the intercept (empty tuple); the remaining columns are
/// spin-orbital tuples `i₁ < … < i_j`, `1 ≤ j ≤ k`, ordered by length and then
/// lexicographically. Alpha spin-orbitals are `0..n`, beta `n..2n`. Each row
/// stores the columns whose product of occupations is 1.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    order: usize,
    n_spin_orbitals: usize,
    columns: Vec<Vec<usize>>,
    rows: Vec<Vec<u32>>,
    basis: Arc<DeterminantBasis>,
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of columns of an order-`k` feature matrix over `k_spin` spin-orbitals.
pub fn feature_count(k_spin: usize, order: usize) -> usize {
    1 + (1..=order).map(|j| binomial(k_spin, j)).sum::<usize>()
}

/// Calls `f` on every `j`-subset of `items` in lexicographic order.
fn for_each_combination(items: &[usize], j: usize, f: &mut impl FnMut(&[usize])) {
    let n = items.len();
    if j > n {
        return;
    }
    let mut idx: Vec<usize> = (0..j).collect();
    let mut buf = vec![0usize; j];
    loop {
        for (b, &i) in buf.iter_mut().zip(&idx) {
            *b = items[i];
        }
        f(&buf);
        let mut t = j;
        loop {
            if t == 0 {
                return;
            }
            t -= 1;
            if idx[t] != t + n - j {
                break;
            }
            if t == 0 {
                return;
            }
        }
        if idx[t] == t + n - j {
            return;
        }
        idx[t] += 1;
        for u in t + 1..j {
            idx[u] = idx[u - 1] + 1;
        }
    }
}

struct Ranker {
    k_spin: usize,
    /// binom[a][b] = C(a, b)
    binom: Vec<Vec<usize>>,
    offsets: Vec<usize>,
}

impl Ranker {
    fn new(k_spin: usize, order: usize) -> Self {
        let binom = (0..=k_spin)
            .map(|a| (0..=order).map(|b| binomial(a, b)).collect())
            .collect();
        let mut offsets = vec![0; order + 1];
        let mut acc = 1;
        for j in 1..=order {
            offsets[j] = acc;
            acc += binomial(k_spin, j);
        }
        Ranker {
            k_spin,
            binom,
            offsets,
        }
    }

    /// Column index of a sorted tuple.
    fn column(&self, tuple: &[usize]) -> usize {
        let j = tuple.len();
        let mut rank = 0;
        let mut next = 0;
        for (t, &c) in tuple.iter().enumerate() {
            for v in next..c {
                rank += self.binom[self.k_spin - 1 - v][j - 1 - t];
            }
            next = c + 1;
        }
        self.offsets[j] + rank
    }
}

/// Builds the order-`order` feature matrix for every determinant of `basis`.
pub fn build_features(basis: &Arc<DeterminantBasis>, order: usize) -> Result<FeatureMatrix> {
    let n = basis.n_spatial();
    let k_spin = 2 * n;
    if order > k_spin {
        return Err(Error::Domain(format!(
            "order {order} exceeds the {k_spin} spin-orbitals"
        )));
    }
    let mut columns = vec![Vec::new()];
    for j in 1..=order {
        let all: Vec<usize> = (0..k_spin).collect();
        for_each_combination(&all, j, &mut |t| columns.push(t.to_vec()));
    }
    debug_assert_eq!(columns.len(), feature_count(k_spin, order));
    let ranker = Ranker::new(k_spin, order);
    let rows = (0..basis.len())
        .into_par_iter()
        .map(|i| {
            let occ = basis.get(i).occupied_spin_orbitals(n);
            let mut active = vec![0u32];
            for j in 1..=order.min(occ.len()) {
                for_each_combination(&occ, j, &mut |t| active.push(ranker.column(t) as u32));
            }
            active
        })
        .collect();
    Ok(FeatureMatrix {
        order,
        n_spin_orbitals: k_spin,
        columns,
        rows,
        basis: basis.clone(),
    })
}

impl FeatureMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_spin_orbitals(&self) -> usize {
        self.n_spin_orbitals
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    /// Spin-orbital tuple of each column; the intercept is the empty tuple.
    pub fn columns(&self) -> &[Vec<usize>] {
        &self.columns
    }

    pub fn basis(&self) -> &Arc<DeterminantBasis> {
        &self.basis
    }

    /// Ascending indices of the columns equal to 1 in `row`, intercept first.
    pub fn active(&self, row: usize) -> &[u32] {
        &self.rows[row]
    }

    pub fn entry(&self, row: usize, column: usize) -> u8 {
        u8::from(self.rows[row].binary_search(&(column as u32)).is_ok())
    }

    /// Dense 0/1 copy of the matrix.
    pub fn dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_rows(), self.n_columns());
        for (i, row) in self.rows.iter().enumerate() {
            for &c in row {
                m[(i, c as usize)] = 1.0;
            }
        }
        m
    }

    /// `Σ_c θ_c x_c` for every row.
    pub fn linear(&self, theta: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&c| theta[c as usize]).sum())
            .collect()
    }

    /// `Σ_n r_n x_n`, accumulated into a vector over columns.
    pub fn transpose_apply(&self, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_columns()];
        for (row, &rn) in self.rows.iter().zip(r) {
            for &c in row {
                out[c as usize] += rn;
            }
        }
        out
    }
}
