mod common;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use occfactor::ansatz::{build_features, fit_magnitudes, FitConfig, PoissonObjective};
use occfactor::fci::{
    compute_rdms, energy_from_rdms, enumerate_basis, solve_ground_state, CIVector, Hamiltonian, SolveMode,
};
use occfactor::integrals::{read_fcidump, IntegralSet};
use occfactor::natural_orbitals::{transform_integrals, OrbitalRotation};
use occfactor::solvers::{solve_nnls, NnlsProblem, SmoothObjective};
use rand::Rng;

use common::*;

#[test]
fn hamiltonian_matches_operator_oracle() {
    for (seed, (n, na, nb)) in [(3, 1, 1), (3, 2, 1), (4, 2, 2), (4, 3, 1), (3, 3, 0)].into_iter().enumerate() {
        let ints = random_integrals(n, 100 + seed as u64);
        let basis = enumerate_basis(n, na, nb).unwrap();
        let oracle = operator_hamiltonian(&ints, &basis);
        let ham = Hamiltonian::new(&ints, &basis).unwrap();
        let dense = ham.dense_matrix();
        assert!((&dense - &oracle).amax() < 1e-12, "dense mismatch for {n},{na},{nb}");
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                let me = ham.matrix_element(i, j);
                assert!((me - oracle[(i, j)]).abs() < 1e-12);
            }
        }
        let x = random_unit_vector(basis.len(), seed as u64);
        let sigma = ham.apply(&x).unwrap();
        let expected = &oracle * DVector::from_column_slice(&x);
        for (a, b) in sigma.iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn ground_state_matches_oracle_eigenvalue() {
    let ints = random_integrals(4, 7);
    let basis = enumerate_basis(4, 2, 2).unwrap();
    let oracle = operator_hamiltonian(&ints, &basis);
    let lowest = SymmetricEigen::new(oracle).eigenvalues.min();
    for mode in [SolveMode::Dense, SolveMode::Davidson] {
        let psi = solve_ground_state(&ints, 2, 2, mode).unwrap();
        assert!((psi.energy() - lowest).abs() < 1e-9, "{mode:?}");
    }
}

#[test]
fn rdms_match_operator_oracle() {
    let ints = random_integrals(3, 11);
    let basis = Arc::new(enumerate_basis(3, 2, 1).unwrap());
    let c = random_unit_vector(basis.len(), 12);
    let psi = CIVector::new(basis.clone(), c.clone(), 0.0).unwrap();
    let (r1, r2) = compute_rdms(&psi);
    let o1 = operator_rdm1(&c, &basis);
    let o2 = operator_rdm2(&c, &basis);
    assert!((&r1.matrix - &o1).amax() < 1e-12);
    for (a, b) in r2.as_slice().iter().zip(&o2) {
        assert!((a - b).abs() < 1e-12);
    }
    let oracle = operator_hamiltonian(&ints, &basis);
    let cv = DVector::from_column_slice(&c);
    let expectation = cv.dot(&(&oracle * &cv));
    assert!((energy_from_rdms(&r1, &r2, &ints).unwrap() - expectation).abs() < 1e-10);
}

fn naive_transform(ints: &IntegralSet, c: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let n = ints.n_spatial();
    let h = DMatrix::from_fn(n, n, |a, b| {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += c[(i, a)] * ints.h()[(i, j)] * c[(j, b)];
            }
        }
        acc
    });
    let mut v = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for cc in 0..n {
                for d in 0..n {
                    let mut acc = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            for k in 0..n {
                                for l in 0..n {
                                    acc += c[(i, a)] * c[(j, b)] * ints.v(i, j, k, l) * c[(k, cc)] * c[(l, d)];
                                }
                            }
                        }
                    }
                    v[((a * n + b) * n + cc) * n + d] = acc;
                }
            }
        }
    }
    (h, v)
}

#[test]
fn integral_transform_matches_naive_sum() {
    let n = 4;
    let ints = random_integrals(n, 21);
    let c = random_rotation(n, 22);
    let rot = OrbitalRotation {
        coefficients: c.clone(),
        occupations: vec![0.0; n],
    };
    let out = transform_integrals(&ints, &rot).unwrap();
    let (h, v) = naive_transform(&ints, &c);
    assert!((out.h() - h).amax() < 1e-12);
    for (a, b) in out.v_flat().iter().zip(&v) {
        assert!((a - b).abs() < 1e-12);
    }
    assert_eq!(out.e_core(), ints.e_core());
    assert_eq!(out.symmetry_defect(), 0.0);
}

#[test]
fn rotated_integrals_keep_the_spectrum() {
    let ints = random_integrals(3, 31);
    let rot = OrbitalRotation {
        coefficients: random_rotation(3, 32),
        occupations: vec![0.0; 3],
    };
    let rotated = transform_integrals(&ints, &rot).unwrap();
    let e0 = solve_ground_state(&ints, 2, 1, SolveMode::Dense).unwrap().energy();
    let e1 = solve_ground_state(&rotated, 2, 1, SolveMode::Dense).unwrap().energy();
    assert!((e0 - e1).abs() < 1e-10);
}

/// Minimum over all feasible passive sets of the unconstrained least squares.
fn nnls_brute_force(p: &NnlsProblem) -> f64 {
    let cols = p.a.ncols();
    let sw = p.row_weights.map(f64::sqrt);
    let a = DMatrix::from_fn(p.a.nrows(), cols, |i, j| p.a[(i, j)] * sw[i]);
    let b = p.b.component_mul(&sw);
    let mut best = b.norm_squared();
    for mask in 1u32..(1 << cols) {
        let idx: Vec<usize> = (0..cols).filter(|&j| mask >> j & 1 == 1).collect();
        let sub = a.select_columns(&idx);
        let z = sub.clone().svd(true, true).solve(&b, 1e-12).unwrap();
        if z.iter().all(|&x| x >= -1e-12) {
            let mut full = DVector::zeros(cols);
            for (k, &j) in idx.iter().enumerate() {
                full[j] = z[k].max(0.0);
            }
            best = best.min(p.objective(&full));
        }
    }
    best
}

#[test]
fn nnls_matches_brute_force_and_kkt() {
    let mut r = rng(41);
    for trial in 0..40 {
        let m = 4 + trial % 6;
        let cols = 2 + trial % 5;
        let a = DMatrix::from_fn(m, cols, |_, _| r.random_range(-1.0..1.0));
        let b = DVector::from_fn(m, |_, _| r.random_range(-2.0..2.0));
        let w = DVector::from_fn(m, |i, _| if i == 0 && trial % 3 == 0 { 0.0 } else { r.random_range(0.1..2.0) });
        let p = NnlsProblem::new(a, b, w).unwrap();
        let x = solve_nnls(&p);
        assert!(x.iter().all(|&v| v >= 0.0));
        let g = p.gradient(&x);
        for j in 0..cols {
            if x[j] > 0.0 {
                assert!(g[j].abs() < 1e-8, "trial {trial}: free gradient {}", g[j]);
            } else {
                assert!(g[j] > -1e-8, "trial {trial}: bound gradient {}", g[j]);
            }
        }
        let brute = nnls_brute_force(&p);
        assert!((p.objective(&x) - brute).abs() < 1e-10 * brute.max(1.0), "trial {trial}");
    }
}

#[test]
fn poisson_stage_matches_grid_search() {
    // one alpha and one beta electron in two orbitals: four determinants.
    // Rows differ only through spin-orbitals 0 and 2, so ω₁ = ω₃ = 0 loses
    // nothing and the intercept has a closed form.
    let basis = Arc::new(enumerate_basis(2, 1, 1).unwrap());
    let psi = CIVector::new(basis.clone(), vec![0.2, 0.5, 0.45, 0.7], 0.0).unwrap();
    let features = build_features(&basis, 1).unwrap();
    let fit = fit_magnitudes(&psi, &features, &FitConfig::default()).unwrap();

    let y: Vec<f64> = psi.coefficients().iter().map(|x| x * x).collect();
    let objective = PoissonObjective::new(&features, y.clone());
    let col = |i: usize| features.columns().iter().position(|t| t == &vec![i]).unwrap();
    let (c0, c2) = (col(0), col(2));
    let rows: Vec<(f64, f64)> = (0..4)
        .map(|r| (features.entry(r, c0) as f64, features.entry(r, c2) as f64))
        .collect();
    let sum_y: f64 = y.iter().sum();
    let grid_value = |w0: f64, w2: f64| {
        let s: f64 = rows.iter().map(|(x0, x2)| (-(w0 * x0 + w2 * x2)).exp()).sum();
        let a = (s / sum_y).ln();
        rows.iter()
            .zip(&y)
            .map(|((x0, x2), yi)| {
                let eta = a + w0 * x0 + w2 * x2;
                (-eta).exp() + yi * eta
            })
            .sum::<f64>()
    };
    let steps = 5001;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..steps {
        for j in 0..steps {
            let (w0, w2) = (i as f64 * 1e-3, j as f64 * 1e-3);
            let v = grid_value(w0, w2);
            if v < best.0 {
                best = (v, w0, w2);
            }
        }
    }
    let mut theta = vec![0.0; features.n_columns()];
    theta[c0] = best.1;
    theta[c2] = best.2;
    let s: f64 = rows.iter().map(|(x0, x2)| (-(best.1 * x0 + best.2 * x2)).exp()).sum();
    theta[0] = (s / sum_y).ln();
    let mut grad = vec![0.0; theta.len()];
    assert!((objective.evaluate(&theta, &mut grad) - best.0).abs() < 1e-12);

    assert!(fit.step1_objective <= best.0 + 1e-12);
    assert!(best.0 - fit.step1_objective < 1e-5);
}

#[test]
fn handwritten_two_orbital_fcidump() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h2.fcidump");
    let text = "\
 &FCI NORB=2,NELEC=2,MS2=0,
  ORBSYM=1,1,
  ISYM=1,
 &END
  0.6757101548                1    1    1    1
  0.1809270469D+00            2    1    2    1
  0.6645817483                2    2    1    1
  0.6985609287                2    2    2    2
 -1.2563390710                1    1    0    0
 -0.4718960072                2    2    0    0
  0.05                        2    1    0    0
  0.7137539936                0    0    0    0
";
    std::fs::write(&path, text).unwrap();
    let ints = read_fcidump(&path).unwrap();

    let mut h = DMatrix::zeros(2, 2);
    h[(0, 0)] = -1.2563390710;
    h[(1, 1)] = -0.4718960072;
    h[(0, 1)] = 0.05;
    h[(1, 0)] = 0.05;
    let mut v = vec![0.0; 16];
    let idx = |p: usize, q: usize, r: usize, s: usize| ((p * 2 + q) * 2 + r) * 2 + s;
    v[idx(0, 0, 0, 0)] = 0.6757101548;
    v[idx(1, 1, 1, 1)] = 0.6985609287;
    for (p, q, r, s) in [(1, 1, 0, 0), (0, 0, 1, 1)] {
        v[idx(p, q, r, s)] = 0.6645817483;
    }
    for (p, q, r, s) in [(1, 0, 1, 0), (0, 1, 1, 0), (1, 0, 0, 1), (0, 1, 0, 1)] {
        v[idx(p, q, r, s)] = 0.1809270469;
    }
    let expected = IntegralSet::new(h, v, 0.7137539936).unwrap();
    assert_eq!(ints, expected);

    let basis = enumerate_basis(2, 1, 1).unwrap();
    let oracle = operator_hamiltonian(&expected, &basis);
    let lowest = SymmetricEigen::new(oracle).eigenvalues.min();
    let psi = solve_ground_state(&ints, 1, 1, SolveMode::Dense).unwrap();
    assert!((psi.energy() - lowest).abs() < 1e-12);
}
