//! Bound-constrained smooth minimization by projected limited-memory BFGS.
//!
//! Variables sitting on their lower bound with an outward-pointing gradient
//! are frozen for the iteration; the quasi-Newton direction is built on the
//! remaining free variables and the step is a projected backtracking search
//! with an Armijo condition, so accepted objective values never increase.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// A smooth objective evaluated together with its gradient.
pub trait SmoothObjective {
    /// Returns `f(x)` and writes `∇f(x)` into `grad`.
    fn evaluate(&self, x: &[f64], grad: &mut [f64]) -> f64;
}

impl<F> SmoothObjective for F
where
    F: Fn(&[f64], &mut [f64]) -> f64,
{
    fn evaluate(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self(x, grad)
    }
}

/// Objective, per-coordinate lower bounds (`-inf` for none) and start point.
pub struct BoundMinProblem<'a> {
    pub objective: &'a dyn SmoothObjective,
    pub lower_bounds: Vec<f64>,
    pub x0: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeConfig {
    /// Stop when the infinity norm of the projected gradient drops below this.
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Multiplier on the first trial step of every line search.
    pub step_scale: f64,
    /// Number of stored correction pairs.
    pub memory: usize,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        MinimizeConfig {
            grad_tol: 1e-8,
            max_iter: 2000,
            step_scale: 1.0,
            memory: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Projected gradient below tolerance.
    Converged,
    MaxIterations,
    /// No step along the projected search path decreased the objective.
    LineSearchStalled,
}

#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub x: Vec<f64>,
    pub objective: f64,
    pub projected_gradient: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
}

impl MinimizeResult {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

fn dot_masked(a: &[f64], b: &[f64], free: &[bool]) -> f64 {
    a.iter()
        .zip(b)
        .zip(free)
        .filter(|(_, &f)| f)
        .map(|((x, y), _)| x * y)
        .sum()
}

fn projected_gradient_norm(x: &[f64], g: &[f64], lower: &[f64]) -> f64 {
    x.iter()
        .zip(g)
        .zip(lower)
        .map(|((&xi, &gi), &li)| ((xi - gi).max(li) - xi).abs())
        .fold(0.0, f64::max)
}

/// Compares the gradient with Richardson-extrapolated central differences
/// along a few fixed unit directions.
pub fn check_gradient(objective: &dyn SmoothObjective, x: &[f64]) -> Result<()> {
    let n = x.len();
    if n == 0 {
        return Ok(());
    }
    let mut g = vec![0.0; n];
    let f0 = objective.evaluate(x, &mut g);
    let mut scratch = vec![0.0; n];
    let mut central = |dir: &[f64], h: f64| {
        let xp: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + h * d).collect();
        let xm: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a - h * d).collect();
        (objective.evaluate(&xp, &mut scratch) - objective.evaluate(&xm, &mut scratch)) / (2.0 * h)
    };
    for probe in 0..3u32 {
        let mut dir: Vec<f64> = (0..n)
            .map(|j| ((j as f64 + 1.0) * (1.618 + probe as f64 * 0.77)).sin())
            .collect();
        let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        dir.iter_mut().for_each(|d| *d /= norm);
        let h = 1e-4;
        let numeric = (4.0 * central(&dir, h / 2.0) - central(&dir, h)) / 3.0;
        let analytic: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();
        let tol = 1e-5 * numeric.abs().max(analytic.abs()) + 1e-7 * (1.0 + f0.abs());
        if !((numeric - analytic).abs() <= tol) {
            return Err(Error::GradientMismatch { analytic, numeric });
        }
    }
    Ok(())
}

/// Minimizes `problem.objective` subject to `x ≥ lower_bounds`.
///
/// The start point is projected onto the feasible set first. Running out of
/// iterations is reported through [`MinimizeResult::termination`], not as an
/// error; a non-finite objective or gradient at an accepted point is an error.
pub fn minimize_bounded(problem: &BoundMinProblem<'_>, config: &MinimizeConfig) -> Result<MinimizeResult> {
    let n = problem.x0.len();
    let lower = &problem.lower_bounds;
    if lower.len() != n {
        return Err(Error::Domain(format!(
            "{} lower bounds for {n} variables",
            lower.len()
        )));
    }
    let project = |v: &mut [f64]| {
        v.iter_mut().zip(lower).for_each(|(x, &l)| {
            if *x < l {
                *x = l
            }
        })
    };
    let objective = problem.objective;
    let mut x = problem.x0.clone();
    project(&mut x);

    if cfg!(debug_assertions) {
        check_gradient(objective, &x)?;
    }

    let mut g = vec![0.0; n];
    let mut f = objective.evaluate(&x, &mut g);
    let mut evaluations = 1;
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { point: x });
    }

    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut g_new = vec![0.0; n];
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;

    while iterations < config.max_iter {
        if projected_gradient_norm(&x, &g, lower) <= config.grad_tol {
            termination = Termination::Converged;
            break;
        }
        let free: Vec<bool> = (0..n)
            .map(|j| !(x[j] <= lower[j] && g[j] > 0.0))
            .collect();

        let mut accepted = None;
        for attempt in 0..2 {
            if attempt == 1 {
                if history.is_empty() {
                    break;
                }
                history.clear();
            }
            let d = search_direction(&g, &free, &history);
            let slope = dot_masked(&g, &d, &free);
            let d = if slope < 0.0 {
                d
            } else {
                history.clear();
                (0..n).map(|j| if free[j] { -g[j] } else { 0.0 }).collect()
            };
            let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if dmax == 0.0 {
                break;
            }
            let mut step = config.step_scale;
            if history.is_empty() {
                step *= 1.0f64.min(1.0 / dmax);
            }
            for _ in 0..60 {
                let mut trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
                project(&mut trial);
                let decrease: f64 = g.iter().zip(trial.iter().zip(&x)).map(|(gi, (t, xi))| gi * (t - xi)).sum();
                let f_trial = objective.evaluate(&trial, &mut g_new);
                evaluations += 1;
                if f_trial.is_finite()
                    && g_new.iter().all(|v| v.is_finite())
                    && decrease < 0.0
                    && f_trial <= f + 1e-4 * decrease
                {
                    accepted = Some((trial, f_trial));
                    break;
                }
                step *= 0.5;
            }
            if accepted.is_some() {
                break;
            }
        }

        let Some((x_new, f_next)) = accepted else {
            termination = Termination::LineSearchStalled;
            break;
        };
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let yy: f64 = y.iter().map(|v| v * v).sum();
        if sy > 1e-12 * yy && sy > 0.0 {
            history.push_back((s, y, 1.0 / sy));
            if history.len() > config.memory.max(1) {
                history.pop_front();
            }
        }
        x = x_new;
        f = f_next;
        std::mem::swap(&mut g, &mut g_new);
        iterations += 1;
    }
    if termination == Termination::MaxIterations
        && projected_gradient_norm(&x, &g, lower) <= config.grad_tol
    {
        termination = Termination::Converged;
    }

    Ok(MinimizeResult {
        projected_gradient: projected_gradient_norm(&x, &g, lower),
        x,
        objective: f,
        iterations,
        evaluations,
        termination,
    })
}

/// Two-loop recursion restricted to the free variables.
fn search_direction(g: &[f64], free: &[bool], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = g
        .iter()
        .zip(free)
        .map(|(v, &f)| if f { *v } else { 0.0 })
        .collect();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot_masked(s, &q, free);
        q.iter_mut()
            .zip(y)
            .zip(free)
            .filter(|(_, &f)| f)
            .for_each(|((qi, yi), _)| *qi -= a * yi);
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let yy = dot_masked(y, y, free);
        let sy = dot_masked(s, y, free);
        if yy > 0.0 && sy > 0.0 {
            let gamma = sy / yy;
            q.iter_mut().for_each(|v| *v *= gamma);
        }
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let b = rho * dot_masked(y, &q, free);
        q.iter_mut()
            .zip(s)
            .zip(free)
            .filter(|(_, &f)| f)
            .for_each(|((qi, si), _)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}
