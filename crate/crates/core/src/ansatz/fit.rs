use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::features::FeatureMatrix;
use super::model::{AnsatzModel, MagnitudeTarget};
use crate::error::{Error, Result};
use crate::fci::{compute_rdms, energy_from_rdms, CIVector};
use crate::integrals::IntegralSet;
use crate::solvers::{
    minimize_bounded, solve_nnls, BoundMinProblem, MinimizeConfig, MinimizeResult, NnlsProblem,
    SmoothObjective, Termination,
};

/// Response used by the convex first stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step1Response {
    /// `y` equal to the magnitude target itself, so `e^{−η}` is the Poisson mean.
    #[default]
    Target,
    /// `y = −ln max(c², ε²)`
    NegLog,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    /// Coefficients with `|c|` at or below this are treated as zeros.
    pub clamp_epsilon: f64,
    pub target: MagnitudeTarget,
    pub step1_response: Step1Response,
    /// Initial step multiplier for the refinement stage.
    pub step_scale: f64,
    /// Step multiplier of the refinement retry.
    pub restart_step_scale: f64,
    pub step1: MinimizeConfig,
    pub step2: MinimizeConfig,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            clamp_epsilon: 1e-10,
            target: MagnitudeTarget::Squared,
            step1_response: Step1Response::Target,
            step_scale: 1.0,
            restart_step_scale: 10.0,
            step1: MinimizeConfig::default(),
            step2: MinimizeConfig::default(),
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.clamp_epsilon > 0.0) {
            return Err(Error::Domain("clamp_epsilon must be positive".into()));
        }
        if !(self.step_scale > 0.0) || !(self.restart_step_scale > 0.0) {
            return Err(Error::Domain("step scales must be positive".into()));
        }
        Ok(())
    }
}

/// Convex first stage: `Σ_n (e^{−η_n} + y_n η_n)` with `η = Xθ`, `θ = [A, ω…]`.
pub struct PoissonObjective<'a> {
    features: &'a FeatureMatrix,
    y: Vec<f64>,
}

impl<'a> PoissonObjective<'a> {
    pub fn new(features: &'a FeatureMatrix, y: Vec<f64>) -> Self {
        PoissonObjective { features, y }
    }
}

impl SmoothObjective for PoissonObjective<'_> {
    fn evaluate(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        let eta = self.features.linear(theta);
        let mut f = 0.0;
        let mut r = Vec::with_capacity(eta.len());
        for (&e, &y) in eta.iter().zip(&self.y) {
            let p = (-e).exp();
            f += p + y * e;
            r.push(y - p);
        }
        grad.copy_from_slice(&self.features.transpose_apply(&r));
        f
    }
}

/// Refinement stage: `Σ_n (t_n − e^{−η_n})²`.
pub struct RefineObjective<'a> {
    features: &'a FeatureMatrix,
    t: Vec<f64>,
}

impl<'a> RefineObjective<'a> {
    pub fn new(features: &'a FeatureMatrix, t: Vec<f64>) -> Self {
        RefineObjective { features, t }
    }
}

impl SmoothObjective for RefineObjective<'_> {
    fn evaluate(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        let eta = self.features.linear(theta);
        let mut f = 0.0;
        let mut r = Vec::with_capacity(eta.len());
        for (&e, &t) in eta.iter().zip(&self.t) {
            let p = (-e).exp();
            let d = t - p;
            f += d * d;
            r.push(2.0 * d * p);
        }
        grad.copy_from_slice(&self.features.transpose_apply(&r));
        f
    }
}

fn value(objective: &dyn SmoothObjective, theta: &[f64]) -> f64 {
    let mut g = vec![0.0; theta.len()];
    objective.evaluate(theta, &mut g)
}

/// Diagnostics of the two-stage magnitude fit.
#[derive(Debug, Clone)]
pub struct MagnitudeFit {
    /// Fitted `A` and `ω`; `v_phase` is zero.
    pub model: AnsatzModel,
    pub step1_objective: f64,
    pub step1_termination: Termination,
    /// Refinement objective at the first-stage parameters.
    pub step2_initial: f64,
    pub step2_objective: f64,
    pub step2_termination: Termination,
    pub restarted: bool,
}

fn check_aligned(psi: &CIVector, features: &FeatureMatrix) -> Result<()> {
    let fb = features.basis();
    let pb = psi.basis();
    if features.n_rows() != psi.len()
        || fb.n_spatial() != pb.n_spatial()
        || fb.n_alpha() != pb.n_alpha()
        || fb.n_beta() != pb.n_beta()
    {
        return Err(Error::Domain(format!(
            "feature matrix has {} rows, wavefunction has {} coefficients in a different basis",
            features.n_rows(),
            psi.len()
        )));
    }
    Ok(())
}

/// Fits `A` and `ω ≥ 0` by the Poisson first stage and least-squares refinement.
///
/// Before refinement the intercept is reset to its exact least-squares value
/// for the first-stage `ω`. If refinement does not lower the objective below
/// its starting value it is rerun with `restart_step_scale` and the better of
/// the two results is kept.
pub fn fit_magnitudes(psi: &CIVector, features: &FeatureMatrix, config: &FitConfig) -> Result<MagnitudeFit> {
    config.validate()?;
    check_aligned(psi, features)?;
    let c = psi.coefficients();
    let p = features.n_columns();
    let eps2 = config.clamp_epsilon * config.clamp_epsilon;

    let t: Vec<f64> = c.iter().map(|&x| config.target.of(x)).collect();
    let y: Vec<f64> = match config.step1_response {
        Step1Response::NegLog => c.iter().map(|&x| -(x * x).max(eps2).ln()).collect(),
        Step1Response::Target => t.clone(),
    };
    let mut lower = vec![0.0; p];
    lower[0] = f64::NEG_INFINITY;

    let mean_y = y.iter().sum::<f64>() / y.len() as f64;
    let mut theta0 = vec![0.0; p];
    theta0[0] = if mean_y > 0.0 { -mean_y.ln() } else { 0.0 };

    let poisson = PoissonObjective::new(features, y);
    let step1 = minimize_bounded(
        &BoundMinProblem {
            objective: &poisson,
            lower_bounds: lower.clone(),
            x0: theta0,
        },
        &config.step1,
    )
    .map_err(|e| Error::FitFailed {
        step1: f64::NAN,
        step2: f64::NAN,
        reason: format!("first stage: {e}"),
    })?;

    let refine = RefineObjective::new(features, t.clone());
    let step2_initial = value(&refine, &step1.x);

    let mut start = step1.x.clone();
    let eta = features.linear(&start);
    let (num, den) = eta
        .iter()
        .zip(&t)
        .fold((0.0, 0.0), |(n, d), (&e, &tn)| {
            let q = (-(e - start[0])).exp();
            (n + tn * q, d + q * q)
        });
    if num > 0.0 && den > 0.0 && (num / den).is_finite() {
        start[0] = -(num / den).ln();
    }
    let start_value = value(&refine, &start);
    if !(start_value <= step2_initial) {
        start = step1.x.clone();
    }
    let start_value = start_value.min(step2_initial);

    let run = |scale: f64| -> Result<MinimizeResult> {
        let cfg = MinimizeConfig {
            step_scale: scale,
            ..config.step2
        };
        minimize_bounded(
            &BoundMinProblem {
                objective: &refine,
                lower_bounds: lower.clone(),
                x0: start.clone(),
            },
            &cfg,
        )
        .map_err(|e| Error::FitFailed {
            step1: step1.objective,
            step2: start_value,
            reason: format!("refinement: {e}"),
        })
    };
    let mut best = run(config.step_scale)?;
    let mut restarted = false;
    if !(best.objective < start_value) {
        restarted = true;
        let retry = run(config.restart_step_scale)?;
        if retry.objective < best.objective {
            best = retry;
        }
    }

    let mut model = AnsatzModel::zeros(features.order(), config.target, features.columns().to_vec());
    model.set_theta(&best.x);
    Ok(MagnitudeFit {
        model,
        step1_objective: step1.objective,
        step1_termination: step1.termination,
        step2_initial,
        step2_objective: best.objective,
        step2_termination: best.termination,
        restarted,
    })
}

/// Fits `v_phase ≥ 0` by weighted NNLS against targets `0` (c > 0) and `π`
/// (c < 0).
///
/// Row `n` enters the squared sum with weight `|c_n|`; coefficients at or
/// below `clamp_epsilon` get no weight.
pub fn fit_phase(
    psi: &CIVector,
    features: &FeatureMatrix,
    model: &AnsatzModel,
    config: &FitConfig,
) -> Result<AnsatzModel> {
    config.validate()?;
    check_aligned(psi, features)?;
    if model.n_columns() != features.n_columns() {
        return Err(Error::Domain("model and feature matrix have different columns".into()));
    }
    let c = psi.coefficients();
    let rows: Vec<usize> = (0..c.len())
        .filter(|&i| c[i].abs() > config.clamp_epsilon)
        .collect();
    let mut out = model.clone();
    out.v_phase = vec![0.0; features.n_columns()];
    if rows.iter().all(|&i| c[i] > 0.0) {
        return Ok(out);
    }
    // columns never switched on by a weighted row cannot affect the fit
    let mut used = vec![false; features.n_columns()];
    for &i in &rows {
        for &col in features.active(i) {
            used[col as usize] = true;
        }
    }
    let cols: Vec<usize> = (0..used.len()).filter(|&j| used[j]).collect();
    let mut position = vec![usize::MAX; used.len()];
    for (k, &j) in cols.iter().enumerate() {
        position[j] = k;
    }
    let mut a = DMatrix::zeros(rows.len(), cols.len());
    for (r, &i) in rows.iter().enumerate() {
        for &col in features.active(i) {
            a[(r, position[col as usize])] = 1.0;
        }
    }
    let b = DVector::from_iterator(rows.len(), rows.iter().map(|&i| if c[i] < 0.0 { PI } else { 0.0 }));
    let w = DVector::from_iterator(rows.len(), rows.iter().map(|&i| c[i].abs()));
    let x = solve_nnls(&NnlsProblem::new(a, b, w)?);
    for (k, &j) in cols.iter().enumerate() {
        out.v_phase[j] = x[k];
    }
    Ok(out)
}

/// Magnitude fit followed by the phase fit.
pub fn fit_ansatz(psi: &CIVector, features: &FeatureMatrix, config: &FitConfig) -> Result<(AnsatzModel, MagnitudeFit)> {
    let mag = fit_magnitudes(psi, features, config)?;
    let model = fit_phase(psi, features, &mag.model, config)?;
    Ok((model, mag))
}

/// Sign from the phase score: `−1` when `π/2 < score mod 2π < 3π/2`.
pub fn phase_sign(score: f64) -> f64 {
    let phi = score.rem_euclid(2.0 * PI);
    if phi > 0.5 * PI && phi < 1.5 * PI {
        -1.0
    } else {
        1.0
    }
}

/// Normalized signed coefficients predicted by `model`.
pub fn predicted_coefficients(model: &AnsatzModel, features: &FeatureMatrix) -> Result<Vec<f64>> {
    model.validate()?;
    if model.n_columns() != features.n_columns() {
        return Err(Error::Domain("model and feature matrix have different columns".into()));
    }
    Ok(signed_prediction(&model.theta(), &model.v_phase, model.target, features))
}

/// Normalized `sign · e^{−η/2}` (squared target) or `sign · e^{−η}` (absolute),
/// with `η = Xθ` and the sign from the phase score `X v`. No sign constraint
/// is placed on `θ`.
pub fn signed_prediction(theta: &[f64], v_phase: &[f64], target: MagnitudeTarget, features: &FeatureMatrix) -> Vec<f64> {
    let eta = features.linear(theta);
    let phase = features.linear(v_phase);
    let half = match target {
        MagnitudeTarget::Squared => 0.5,
        MagnitudeTarget::Absolute => 1.0,
    };
    let log_mag: Vec<f64> = eta.iter().map(|e| -half * e).collect();
    let top = log_mag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = log_mag
        .iter()
        .zip(&phase)
        .map(|(&l, &s)| phase_sign(s) * (l - top).exp())
        .collect();
    let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
    out.iter_mut().for_each(|x| *x /= norm);
    out
}

/// Predicted wavefunction, with its energy evaluated from its density matrices.
pub fn predict(model: &AnsatzModel, features: &FeatureMatrix, integrals: &IntegralSet) -> Result<CIVector> {
    let coefficients = predicted_coefficients(model, features)?;
    let psi = CIVector::new(features.basis().clone(), coefficients, f64::NAN)?;
    let (r1, r2) = compute_rdms(&psi);
    let energy = energy_from_rdms(&r1, &r2, integrals)?;
    Ok(psi.with_energy(energy))
}
