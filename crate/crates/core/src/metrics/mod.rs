//! Fit quality: overlap, R², energy error, and the end-to-end evaluation.

mod sweep;

use serde::{Deserialize, Serialize};

use crate::ansatz::{
    build_features, fit_magnitudes, fit_phase, predict, signed_prediction, AnsatzModel, FeatureMatrix, FitConfig,
    MagnitudeTarget,
};
use crate::baseline::{fit_baseline, BaselineKind, BaselineScheme};
use crate::error::{Error, Result};
use crate::fci::{compute_rdms, energy_from_rdms, solve_ground_state_with, CIVector, SolverOptions};
use crate::integrals::IntegralSet;
use crate::natural_orbitals::no_pipeline;

pub use sweep::{sweep, write_sweep_csv, SweepRow, SweepSpec, SWEEP_COLUMNS};

/// Value reported when the energies agree exactly.
pub const REL_LOG_ERROR_FLOOR: f64 = -16.0;

fn check_same_basis(a: &CIVector, b: &CIVector) -> Result<()> {
    let (x, y) = (a.basis(), b.basis());
    if a.len() != b.len() || x.n_spatial() != y.n_spatial() || x.n_alpha() != y.n_alpha() || x.n_beta() != y.n_beta() {
        return Err(Error::Domain("wavefunctions live in different determinant bases".into()));
    }
    Ok(())
}

/// `|⟨pred|truth⟩|` of two unit vectors.
pub fn overlap(pred: &CIVector, truth: &CIVector) -> Result<f64> {
    check_same_basis(pred, truth)?;
    let dot: f64 = pred.coefficients().iter().zip(truth.coefficients()).map(|(a, b)| a * b).sum();
    Ok(dot.abs())
}

/// Coefficient of determination of `pred` against `truth`, signed.
///
/// Returns NaN when `truth` is constant.
pub fn r_squared(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() || truth.is_empty() {
        return Err(Error::Domain(format!(
            "R² needs equal non-empty vectors, got {} and {}",
            pred.len(),
            truth.len()
        )));
    }
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let total: f64 = truth.iter().map(|t| (t - mean) * (t - mean)).sum();
    if total == 0.0 {
        return Ok(f64::NAN);
    }
    let residual: f64 = truth.iter().zip(pred).map(|(t, p)| (t - p) * (t - p)).sum();
    Ok(1.0 - residual / total)
}

/// `log₁₀ |(e_true − e_approx) / e_true|`, floored at [`REL_LOG_ERROR_FLOOR`].
pub fn relative_log_error(e_true: f64, e_approx: f64) -> Result<f64> {
    if e_true == 0.0 || !e_true.is_finite() {
        return Err(Error::Domain(format!("relative error undefined for true energy {e_true}")));
    }
    let rel = ((e_true - e_approx) / e_true).abs();
    if rel == 0.0 {
        return Ok(REL_LOG_ERROR_FLOOR);
    }
    Ok(rel.log10().max(REL_LOG_ERROR_FLOOR))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BasisChoice {
    #[serde(rename = "site")]
    Site,
    #[default]
    #[serde(rename = "no")]
    Natural,
}

impl BasisChoice {
    pub fn name(self) -> &'static str {
        match self {
            BasisChoice::Site => "site",
            BasisChoice::Natural => "no",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum Scheme {
    #[default]
    Main,
    Baseline(BaselineKind),
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Main => "main",
            Scheme::Baseline(k) => k.name(),
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        if name == "main" {
            Some(Scheme::Main)
        } else {
            BaselineKind::from_name(name).map(Scheme::Baseline)
        }
    }
}

/// Summary of one fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub order: usize,
    pub scheme: String,
    pub basis: String,
    pub overlap: f64,
    /// NaN (null in JSON) when the true coefficients are constant.
    pub r_squared: f64,
    pub e_true: f64,
    pub e_approx: f64,
    pub rel_log_error: f64,
    /// Magnitude columns including the intercept.
    pub n_parameters: usize,
    pub fci_dimension: usize,
    pub parameter_fraction: f64,
    /// Refinement objective of the main scheme.
    pub magnitude_objective: Option<f64>,
    pub restarted: Option<bool>,
    /// Baseline iteration outcome.
    pub converged: Option<bool>,
    pub ridge_used: Option<bool>,
}

/// Exact ground state in the basis used for fitting.
#[derive(Debug, Clone)]
pub struct Reference {
    pub psi: CIVector,
    pub integrals: IntegralSet,
    pub basis: BasisChoice,
}

/// Solves for the ground state, rotating to natural orbitals if requested.
pub fn prepare_reference(
    integrals: &IntegralSet,
    n_alpha: usize,
    n_beta: usize,
    basis: BasisChoice,
    solver: &SolverOptions,
) -> Result<Reference> {
    match basis {
        BasisChoice::Site => Ok(Reference {
            psi: solve_ground_state_with(integrals, n_alpha, n_beta, solver)?,
            integrals: integrals.clone(),
            basis,
        }),
        BasisChoice::Natural => {
            let sol = no_pipeline(integrals, n_alpha, n_beta, solver)?;
            Ok(Reference {
                psi: sol.psi,
                integrals: sol.integrals,
                basis,
            })
        }
    }
}

/// Output of [`evaluate`].
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: FitReport,
    pub prediction: CIVector,
    /// The fitted model of the main scheme.
    pub model: Option<AnsatzModel>,
}

fn report(
    reference: &Reference,
    features: &FeatureMatrix,
    scheme: &Scheme,
    prediction: &CIVector,
) -> Result<FitReport> {
    let truth = &reference.psi;
    let e_true = truth.energy();
    let n_parameters = features.n_columns();
    Ok(FitReport {
        order: features.order(),
        scheme: scheme.name().to_string(),
        basis: reference.basis.name().to_string(),
        overlap: overlap(prediction, truth)?,
        r_squared: r_squared(prediction.coefficients(), truth.coefficients())?,
        e_true,
        e_approx: prediction.energy(),
        rel_log_error: relative_log_error(e_true, prediction.energy())?,
        n_parameters,
        fci_dimension: truth.len(),
        parameter_fraction: n_parameters as f64 / truth.len() as f64,
        magnitude_objective: None,
        restarted: None,
        converged: None,
        ridge_used: None,
    })
}

/// Builds features, fits with `scheme`, predicts and scores against the reference.
pub fn evaluate(reference: &Reference, order: usize, scheme: &Scheme, config: &FitConfig) -> Result<Evaluation> {
    let features = build_features(reference.psi.basis(), order)?;
    let psi = &reference.psi;
    match scheme {
        Scheme::Main => {
            let mag = fit_magnitudes(psi, &features, config)?;
            let model = fit_phase(psi, &features, &mag.model, config)?;
            let prediction = predict(&model, &features, &reference.integrals)?;
            let mut report = report(reference, &features, scheme, &prediction)?;
            report.magnitude_objective = Some(mag.step2_objective);
            report.restarted = Some(mag.restarted);
            Ok(Evaluation {
                report,
                prediction,
                model: Some(model),
            })
        }
        Scheme::Baseline(kind) => {
            let base = BaselineScheme {
                clamp_epsilon: config.clamp_epsilon,
                ..BaselineScheme::new(*kind)
            };
            let fit = fit_baseline(psi, &features, &base)?;
            if !fit.weights.iter().all(|w| w.is_finite()) {
                return Err(Error::NonFinite { point: fit.weights });
            }
            let signs = fit_phase(
                psi,
                &features,
                &AnsatzModel::zeros(order, MagnitudeTarget::Squared, features.columns().to_vec()),
                config,
            )?;
            let coefficients = signed_prediction(&fit.weights, &signs.v_phase, MagnitudeTarget::Squared, &features);
            let prediction = CIVector::new(psi.basis().clone(), coefficients, f64::NAN)?;
            let (r1, r2) = compute_rdms(&prediction);
            let energy = energy_from_rdms(&r1, &r2, &reference.integrals)?;
            let prediction = prediction.with_energy(energy);
            let mut report = report(reference, &features, scheme, &prediction)?;
            report.converged = Some(fit.converged);
            report.ridge_used = Some(fit.ridge_used);
            Ok(Evaluation {
                report,
                prediction,
                model: None,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fci::enumerate_basis;
    use crate::integrals::{build_hubbard, HubbardSpec};

    fn vector(c: Vec<f64>) -> CIVector {
        let basis = Arc::new(enumerate_basis(2, 1, 1).unwrap());
        CIVector::new(basis, c, 0.0).unwrap()
    }

    #[test]
    fn overlap_cases() {
        let a = vector(vec![1.0, 0.0, 0.0, 0.0]);
        let b = vector(vec![0.0, 1.0, 1.0, 0.0]);
        assert_eq!(overlap(&a, &a).unwrap(), 1.0);
        assert_eq!(overlap(&a, &b).unwrap(), 0.0);
        let c = vector(vec![-1.0, 0.0, 0.0, 0.0]);
        assert_eq!(overlap(&a, &c).unwrap(), 1.0);
    }

    #[test]
    fn overlap_rejects_other_basis() {
        let a = vector(vec![1.0, 0.0, 0.0, 0.0]);
        let basis = Arc::new(enumerate_basis(2, 2, 0).unwrap());
        let b = CIVector::new(basis, vec![1.0], 0.0).unwrap();
        assert!(overlap(&a, &b).is_err());
    }

    #[test]
    fn r_squared_cases() {
        let t = [0.5, -0.5, 0.7, 0.1];
        assert_eq!(r_squared(&t, &t).unwrap(), 1.0);
        assert!(r_squared(&[0.0; 4], &t).unwrap() <= 0.0);
        assert!(r_squared(&t, &[0.5; 4]).unwrap().is_nan());
    }

    #[test]
    fn relative_log_error_cases() {
        assert_eq!(relative_log_error(-2.0, -2.0).unwrap(), -16.0);
        assert!((relative_log_error(-2.0, -1.98).unwrap() + 2.0).abs() < 1e-12);
        assert!(relative_log_error(0.0, 1.0).is_err());
    }

    #[test]
    fn two_site_free_order_one() {
        let ints = build_hubbard(&HubbardSpec::chain(2, 0.0)).unwrap();
        let reference = prepare_reference(&ints, 1, 1, BasisChoice::Natural, &SolverOptions::default()).unwrap();
        let eval = evaluate(&reference, 1, &Scheme::Main, &FitConfig::default()).unwrap();
        assert!((eval.report.overlap - 1.0).abs() < 1e-6);
        assert_eq!(eval.report.n_parameters, 5);
        assert_eq!(eval.report.fci_dimension, 4);
        assert_eq!(eval.report.parameter_fraction, 1.25);
    }

    #[test]
    fn scheme_names() {
        assert_eq!(Scheme::from_name("main"), Some(Scheme::Main));
        assert_eq!(Scheme::from_name("iols").unwrap().name(), "iols");
        assert!(Scheme::from_name("nope").is_none());
    }
}
