//! Accelerated proximal gradient training of the interval-regression weights.
//!
//! Minimizes the average squared-hinge interval loss plus an L1 penalty with
//! FISTA: constant step from a Lipschitz bound, soft-thresholding proximal
//! step, momentum restart with step halving whenever the objective would
//! rise, and a subdifferential stopping test.

use crate::error::{Error, Result};
use crate::learn::{squared_hinge_grad, surrogate_loss, FeatureMatrix, TargetInterval};

#[derive(Debug, Clone)]
pub struct FistaConfig {
    /// L1 regularization strength.
    pub gamma: f64,
    /// Subdifferential residual below which training stops.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FistaConfig {
    fn default() -> Self {
        FistaConfig {
            gamma: 0.0,
            tolerance: 1e-3,
            max_iterations: 100_000,
        }
    }
}

impl FistaConfig {
    pub fn with_gamma(gamma: f64) -> Self {
        FistaConfig {
            gamma,
            ..FistaConfig::default()
        }
    }
}

/// Training result plus convergence diagnostics.
#[derive(Debug, Clone)]
pub struct TrainedWeights {
    pub weights: Vec<f64>,
    pub iterations: usize,
    /// Subdifferential residual at the returned weights.
    pub residual: f64,
    /// Final penalized objective.
    pub objective: f64,
    /// Penalized objective of every accepted iterate, starting at zero weights.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
}

/// Average surrogate loss of predictions `w' X_i 1_S` against the targets.
pub fn average_surrogate_loss(
    weights: &[f64],
    predictors: &[Vec<f64>],
    intervals: &[TargetInterval],
) -> f64 {
    let n = intervals.len() as f64;
    predictors
        .iter()
        .zip(intervals)
        .map(|(v, interval)| {
            let prediction: f64 = v.iter().zip(weights).map(|(x, w)| x * w).sum();
            surrogate_loss(interval, prediction)
        })
        .sum::<f64>()
        / n
}

/// Gradient of [`average_surrogate_loss`] in the weights.
pub fn average_surrogate_grad(
    weights: &[f64],
    predictors: &[Vec<f64>],
    intervals: &[TargetInterval],
) -> Vec<f64> {
    let n = intervals.len() as f64;
    let mut grad = vec![0.0; weights.len()];
    for (v, interval) in predictors.iter().zip(intervals) {
        let prediction: f64 = v.iter().zip(weights).map(|(x, w)| x * w).sum();
        let mut slope = 0.0;
        if interval.lower.is_finite() {
            slope += squared_hinge_grad(prediction - interval.lower);
        }
        if interval.upper.is_finite() {
            slope -= squared_hinge_grad(interval.upper - prediction);
        }
        if slope != 0.0 {
            for (g, x) in grad.iter_mut().zip(v) {
                *g += slope * x;
            }
        }
    }
    for g in &mut grad {
        *g /= n;
    }
    grad
}

/// The per-example predictor vectors `X_i 1_S`.
pub fn predictor_vectors(features: &[FeatureMatrix]) -> Vec<Vec<f64>> {
    features.iter().map(|x| x.row_sums()).collect()
}

fn soft_threshold(value: f64, threshold: f64) -> f64 {
    if value > threshold {
        value - threshold
    } else if value < -threshold {
        value + threshold
    } else {
        0.0
    }
}

fn prox_step(point: &[f64], grad: &[f64], step: f64, gamma: f64) -> Vec<f64> {
    point
        .iter()
        .zip(grad)
        .map(|(y, g)| soft_threshold(y - step * g, step * gamma))
        .collect()
}

/// Distance of the smooth gradient from the L1 subdifferential at `weights`.
fn subdiff_residual(grad: &[f64], weights: &[f64], gamma: f64) -> f64 {
    grad.iter()
        .zip(weights)
        .map(|(&g, &w)| {
            if w == 0.0 {
                (g.abs() - gamma).max(0.0)
            } else {
                (g + gamma * w.signum()).abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Train weights on target intervals with FISTA.
///
/// Uses the constant step `1 / L` with `L = 2 sum ||X_i||_F^2 / n`; whenever
/// an accelerated step would raise the penalized objective the momentum is
/// restarted from the last accepted iterate and the step is halved until the
/// objective decreases again, so accepted objectives are non-increasing.
pub fn train_fista(
    features: &[FeatureMatrix],
    intervals: &[TargetInterval],
    config: &FistaConfig,
) -> Result<TrainedWeights> {
    if features.is_empty() || features.len() != intervals.len() {
        return Err(Error::invalid_input(format!(
            "{} feature matrices for {} target intervals",
            features.len(),
            intervals.len()
        )));
    }
    if !(config.gamma >= 0.0 && config.gamma.is_finite()) {
        return Err(Error::invalid_input(
            "gamma must be finite and non-negative",
        ));
    }
    let dimensions = features[0].dimensions();
    if features.iter().any(|x| x.dimensions() != dimensions) {
        return Err(Error::invalid_input(
            "feature dimensions differ across examples",
        ));
    }
    if intervals.iter().all(|y| y.is_unbounded()) {
        return Err(Error::DegenerateTraining(
            "every target interval is unbounded on both sides".into(),
        ));
    }
    let n = features.len() as f64;
    let lipschitz = 2.0
        * features
            .iter()
            .map(FeatureMatrix::squared_norm)
            .sum::<f64>()
        / n;
    if lipschitz <= 0.0 {
        return Err(Error::invalid_input("all-zero feature matrices"));
    }

    let predictors = predictor_vectors(features);
    let gamma = config.gamma;
    let smooth = |w: &[f64]| average_surrogate_loss(w, &predictors, intervals);
    let grad = |w: &[f64]| average_surrogate_grad(w, &predictors, intervals);
    let penalized = |w: &[f64]| smooth(w) + gamma * w.iter().map(|v| v.abs()).sum::<f64>();

    let mut weights = vec![0.0; dimensions];
    let mut momentum = weights.clone();
    let mut t = 1.0f64;
    let mut step = 1.0 / lipschitz;
    let mut objective = penalized(&weights);
    let mut trace = vec![objective];
    let mut residual = subdiff_residual(&grad(&weights), &weights, gamma);
    let mut iterations = 0;
    let mut converged = residual <= config.tolerance;

    while !converged && iterations < config.max_iterations {
        iterations += 1;
        let grad_at_momentum = grad(&momentum);
        let mut next = prox_step(&momentum, &grad_at_momentum, step, gamma);
        let mut next_objective = penalized(&next);
        if !next_objective.is_finite() {
            return Err(Error::Numeric {
                iteration: iterations,
                message: format!("objective became {next_objective}"),
            });
        }
        if next_objective > objective + 1e-12 {
            // Restart the momentum at the last accepted point, shrinking the
            // step until the plain proximal step decreases the objective.
            momentum = weights.clone();
            t = 1.0;
            let grad_at_weights = grad(&momentum);
            next = prox_step(&momentum, &grad_at_weights, step, gamma);
            next_objective = penalized(&next);
            while next_objective > objective + 1e-12 && step > 1e-300 {
                step *= 0.5;
                next = prox_step(&momentum, &grad_at_weights, step, gamma);
                next_objective = penalized(&next);
            }
            if next_objective > objective + 1e-12 {
                // No step decreases the objective: already at the optimum up
                // to rounding.
                break;
            }
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        momentum = next
            .iter()
            .zip(&weights)
            .map(|(new, old)| new + beta * (new - old))
            .collect();
        weights = next;
        t = t_next;
        objective = next_objective;
        trace.push(objective);
        residual = subdiff_residual(&grad(&weights), &weights, gamma);
        converged = residual <= config.tolerance;
    }

    Ok(TrainedWeights {
        weights,
        iterations,
        residual,
        objective,
        objective_trace: trace,
        converged,
    })
}
