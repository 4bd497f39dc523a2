#![allow(dead_code)]

use nalgebra::DMatrix;
use occfactor::fci::DeterminantBasis;
use occfactor::integrals::IntegralSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random integrals with the full 8-fold symmetry.
pub fn random_integrals(n: usize, seed: u64) -> IntegralSet {
    let mut r = rng(seed);
    let mut h = DMatrix::zeros(n, n);
    for p in 0..n {
        for q in 0..=p {
            let x: f64 = r.random_range(-1.0..1.0);
            h[(p, q)] = x;
            h[(q, p)] = x;
        }
    }
    let mut v = vec![0.0; n * n * n * n];
    let idx = |p: usize, q: usize, r: usize, s: usize| ((p * n + q) * n + r) * n + s;
    for p in 0..n {
        for q in 0..=p {
            for s_r in 0..n {
                for s_s in 0..=s_r {
                    if s_r * (s_r + 1) / 2 + s_s > p * (p + 1) / 2 + q {
                        continue;
                    }
                    let x: f64 = r.random_range(-0.5..0.5) + if p == q && s_r == s_s { 0.8 } else { 0.0 };
                    for (a, b, c, d) in [
                        (p, q, s_r, s_s),
                        (q, p, s_r, s_s),
                        (p, q, s_s, s_r),
                        (q, p, s_s, s_r),
                        (s_r, s_s, p, q),
                        (s_s, s_r, p, q),
                        (s_r, s_s, q, p),
                        (s_s, s_r, q, p),
                    ] {
                        v[idx(a, b, c, d)] = x;
                    }
                }
            }
        }
    }
    IntegralSet::new(h, v, r.random_range(-1.0..1.0)).unwrap()
}

/// Random orthogonal matrix from the QR factorization of a random matrix.
pub fn random_rotation(n: usize, seed: u64) -> DMatrix<f64> {
    let mut r = rng(seed);
    let m = DMatrix::from_fn(n, n, |_, _| r.random_range(-1.0..1.0));
    m.qr().q()
}

/// Fock state over `2n` spin-orbitals; alpha `0..n`, beta `n..2n`.
fn annihilate(state: u64, i: usize) -> Option<(f64, u64)> {
    if state >> i & 1 == 0 {
        return None;
    }
    let below = (0..i).filter(|&k| state >> k & 1 == 1).count();
    Some((if below % 2 == 0 { 1.0 } else { -1.0 }, state & !(1 << i)))
}

fn create(state: u64, i: usize) -> Option<(f64, u64)> {
    if state >> i & 1 == 1 {
        return None;
    }
    let below = (0..i).filter(|&k| state >> k & 1 == 1).count();
    Some((if below % 2 == 0 { 1.0 } else { -1.0 }, state | (1 << i)))
}

/// Applies a product of operators, rightmost first. `(true, i)` creates.
pub fn apply_ops(state: u64, ops: &[(bool, usize)]) -> Option<(f64, u64)> {
    let mut sign = 1.0;
    let mut s = state;
    for &(dagger, i) in ops.iter().rev() {
        let (g, t) = if dagger { create(s, i)? } else { annihilate(s, i)? };
        sign *= g;
        s = t;
    }
    Some((sign, s))
}

pub fn det_bits(basis: &DeterminantBasis, index: usize) -> u64 {
    basis.get(index).spin_orbital_bits(basis.n_spatial())
}

/// Hamiltonian built literally from second-quantized operators.
pub fn operator_hamiltonian(ints: &IntegralSet, basis: &DeterminantBasis) -> DMatrix<f64> {
    let n = ints.n_spatial();
    let dim = basis.len();
    let states: Vec<u64> = (0..dim).map(|i| det_bits(basis, i)).collect();
    let lookup = |s: u64| states.iter().position(|&t| t == s);
    let mut h = DMatrix::zeros(dim, dim);
    for (j, &ket) in states.iter().enumerate() {
        h[(j, j)] += ints.e_core();
        for spin in 0..2 {
            for p in 0..n {
                for q in 0..n {
                    let op = [(true, p + spin * n), (false, q + spin * n)];
                    if let Some((sign, bra)) = apply_ops(ket, &op) {
                        if let Some(i) = lookup(bra) {
                            h[(i, j)] += sign * ints.h()[(p, q)];
                        }
                    }
                }
            }
        }
        for s1 in 0..2 {
            for s2 in 0..2 {
                for p in 0..n {
                    for q in 0..n {
                        for r in 0..n {
                            for s in 0..n {
                                let v = ints.v(p, q, r, s);
                                if v == 0.0 {
                                    continue;
                                }
                                let op = [(true, p + s1 * n), (true, r + s2 * n), (false, s + s2 * n), (false, q + s1 * n)];
                                if let Some((sign, bra)) = apply_ops(ket, &op) {
                                    if let Some(i) = lookup(bra) {
                                        h[(i, j)] += 0.5 * sign * v;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    h
}

/// `Σ_σ ⟨c| a†_{pσ} a_{qσ} |c⟩`
pub fn operator_rdm1(c: &[f64], basis: &DeterminantBasis) -> DMatrix<f64> {
    let n = basis.n_spatial();
    let states: Vec<u64> = (0..basis.len()).map(|i| det_bits(basis, i)).collect();
    DMatrix::from_fn(n, n, |p, q| {
        let mut acc = 0.0;
        for (j, &ket) in states.iter().enumerate() {
            for spin in 0..2 {
                if let Some((sign, bra)) = apply_ops(ket, &[(true, p + spin * n), (false, q + spin * n)]) {
                    if let Some(i) = states.iter().position(|&t| t == bra) {
                        acc += c[i] * sign * c[j];
                    }
                }
            }
        }
        acc
    })
}

/// `Σ_στ ⟨c| a†_{pσ} a†_{rτ} a_{sτ} a_{qσ} |c⟩`, flattened `[p][q][r][s]`.
pub fn operator_rdm2(c: &[f64], basis: &DeterminantBasis) -> Vec<f64> {
    let n = basis.n_spatial();
    let states: Vec<u64> = (0..basis.len()).map(|i| det_bits(basis, i)).collect();
    let mut out = vec![0.0; n * n * n * n];
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let mut acc = 0.0;
                    for (j, &ket) in states.iter().enumerate() {
                        for s1 in 0..2 {
                            for s2 in 0..2 {
                                let op = [(true, p + s1 * n), (true, r + s2 * n), (false, s + s2 * n), (false, q + s1 * n)];
                                if let Some((sign, bra)) = apply_ops(ket, &op) {
                                    if let Some(i) = states.iter().position(|&t| t == bra) {
                                        acc += c[i] * sign * c[j];
                                    }
                                }
                            }
                        }
                    }
                    out[((p * n + q) * n + r) * n + s] = acc;
                }
            }
        }
    }
    out
}

pub fn random_unit_vector(len: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let v: Vec<f64> = (0..len).map(|_| r.random_range(-1.0..1.0)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}
