//! L2-regularized binary logistic regression.
//!
//! Objective, with margin `m_i = (Xw)_i + b`:
//!
//! ```text
//! L(w, b) = Σ_i [ log(1 + exp(m_i)) − y_i·m_i ] + (λ/2)·‖w‖²
//! ```
//!
//! The intercept is not penalized. Training runs limited-memory BFGS from
//! the zero model and stops once the max-norm of the gradient drops below
//! the configured tolerance.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{check_len, FeatureMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lambda: f64,
    pub max_iterations: usize,
    /// Stop when `max_j |∂L/∂θ_j|` falls below this.
    pub gradient_tolerance: f64,
    /// Reserved for randomized initialization; zero start ignores it.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            max_iterations: 500,
            gradient_tolerance: 1e-6,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be >= 1".into()));
        }
        if self.gradient_tolerance.is_nan() || self.gradient_tolerance <= 0.0 {
            return Err(Error::InvalidArgument("gradient_tolerance must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainedOn {
    pub users: usize,
    pub apps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub converged: bool,
    pub iterations: usize,
    pub gradient_max_norm: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
    pub trained_on: TrainedOn,
    pub convergence: Option<Convergence>,
}

/// Loss value and its gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct LossGradient {
    pub loss: f64,
    pub grad_weights: Vec<f64>,
    pub grad_intercept: f64,
}

impl LogRegModel {
    pub fn zeros(n_cols: usize, lambda: f64) -> Self {
        Self {
            weights: vec![0.0; n_cols],
            intercept: 0.0,
            lambda,
            trained_on: TrainedOn { users: 0, apps: n_cols },
            convergence: None,
        }
    }

    /// Linear scores `Xw + b`.
    pub fn margins<M: FeatureMatrix>(&self, x: &M) -> Result<Vec<f64>> {
        check_len("model weights vs feature columns", self.weights.len(), x.n_cols())?;
        let mut m = x.matvec(&self.weights)?;
        for v in &mut m {
            *v += self.intercept;
        }
        Ok(m)
    }

    pub fn predict_proba<M: FeatureMatrix>(&self, x: &M) -> Result<Vec<f64>> {
        Ok(self.margins(x)?.into_iter().map(sigmoid).collect())
    }

    /// Predicted classes; probability exactly 0.5 goes to the positive class.
    pub fn predict<M: FeatureMatrix>(&self, x: &M) -> Result<Vec<u8>> {
        Ok(self.predict_proba(x)?.into_iter().map(|p| (p >= 0.5) as u8).collect())
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow.
pub fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

pub(crate) fn check_labels(y: &[u8]) -> Result<()> {
    match y.iter().position(|&l| l > 1) {
        Some(pos) => Err(Error::NonBinaryLabel(y[pos], pos)),
        None => Ok(()),
    }
}

/// Regularized negative log-likelihood at `model` with its exact gradient.
pub fn nll_and_gradient<M: FeatureMatrix>(model: &LogRegModel, x: &M, y: &[u8]) -> Result<LossGradient> {
    check_len("labels vs feature rows", x.n_rows(), y.len())?;
    check_labels(y)?;
    let mut margins = vec![0.0; x.n_rows()];
    let mut residual = vec![0.0; x.n_rows()];
    let mut grad_weights = vec![0.0; x.n_cols()];
    let (loss, grad_intercept) = evaluate(
        x,
        y,
        &model.weights,
        model.intercept,
        model.lambda,
        &mut margins,
        &mut residual,
        &mut grad_weights,
    )?;
    Ok(LossGradient {
        loss,
        grad_weights,
        grad_intercept,
    })
}

/// Objective only.
pub fn objective<M: FeatureMatrix>(model: &LogRegModel, x: &M, y: &[u8]) -> Result<f64> {
    Ok(nll_and_gradient(model, x, y)?.loss)
}

#[allow(clippy::too_many_arguments)]
fn evaluate<M: FeatureMatrix>(
    x: &M,
    y: &[u8],
    weights: &[f64],
    intercept: f64,
    lambda: f64,
    margins: &mut [f64],
    residual: &mut [f64],
    grad_weights: &mut [f64],
) -> Result<(f64, f64)> {
    check_len("weights vs feature columns", x.n_cols(), weights.len())?;
    x.matvec_into(weights, margins)?;
    let mut loss = 0.0;
    let mut grad_intercept = 0.0;
    for i in 0..margins.len() {
        let m = margins[i] + intercept;
        let yi = y[i] as f64;
        loss += softplus(m) - yi * m;
        residual[i] = sigmoid(m) - yi;
        grad_intercept += residual[i];
    }
    x.transpose_matvec_into(residual, grad_weights)?;
    let mut sq = 0.0;
    for (g, &w) in grad_weights.iter_mut().zip(weights) {
        *g += lambda * w;
        sq += w * w;
    }
    loss += 0.5 * lambda * sq;
    Ok((loss, grad_intercept))
}

const MEMORY: usize = 10;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

struct Workspace<'a, M> {
    x: &'a M,
    y: &'a [u8],
    lambda: f64,
    margins: Vec<f64>,
    residual: Vec<f64>,
    grad_w: Vec<f64>,
}

impl<M: FeatureMatrix> Workspace<'_, M> {
    /// Loss at `theta = [w; b]`, writing the gradient into `grad`.
    fn eval(&mut self, theta: &[f64], grad: &mut [f64]) -> Result<f64> {
        let d = theta.len() - 1;
        let (loss, gb) = evaluate(
            self.x,
            self.y,
            &theta[..d],
            theta[d],
            self.lambda,
            &mut self.margins,
            &mut self.residual,
            &mut self.grad_w,
        )?;
        grad[..d].copy_from_slice(&self.grad_w);
        grad[d] = gb;
        Ok(loss)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Fit the model. Deterministic given `(x, y, cfg)`.
pub fn train<M: FeatureMatrix>(x: &M, y: &[u8], cfg: &TrainConfig) -> Result<LogRegModel> {
    cfg.validate()?;
    check_len("labels vs feature rows", x.n_rows(), y.len())?;
    check_labels(y)?;
    let n_pos = y.iter().filter(|&&l| l == 1).count();
    if x.n_rows() < 2 || n_pos == 0 || n_pos == y.len() {
        return Err(Error::DegenerateLabels(format!(
            "{} rows with {} positives; both classes are required",
            y.len(),
            n_pos
        )));
    }

    let dim = x.n_cols() + 1;
    let mut ws = Workspace {
        x,
        y,
        lambda: cfg.lambda,
        margins: vec![0.0; x.n_rows()],
        residual: vec![0.0; x.n_rows()],
        grad_w: vec![0.0; x.n_cols()],
    };

    let mut theta = vec![0.0; dim];
    let mut grad = vec![0.0; dim];
    let mut f = ws.eval(&theta, &mut grad)?;

    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(MEMORY);
    let mut direction = vec![0.0; dim];
    let mut trial = vec![0.0; dim];
    let mut trial_grad = vec![0.0; dim];
    let mut alphas = [0.0; MEMORY];
    let mut iterations = 0;

    while iterations < cfg.max_iterations && max_norm(&grad) > cfg.gradient_tolerance {
        // Two-loop recursion for d = -H·g.
        direction.copy_from_slice(&grad);
        for (k, (s, yv, rho)) in history.iter().enumerate().rev() {
            alphas[k] = rho * dot(s, &direction);
            for (d, v) in direction.iter_mut().zip(yv) {
                *d -= alphas[k] * v;
            }
        }
        let gamma = history
            .back()
            .map(|(s, yv, _)| dot(s, yv) / dot(yv, yv))
            .unwrap_or_else(|| 1.0 / max_norm(&grad).max(1.0));
        for d in direction.iter_mut() {
            *d *= gamma;
        }
        for (k, (s, yv, rho)) in history.iter().enumerate() {
            let beta = rho * dot(yv, &direction);
            for (d, v) in direction.iter_mut().zip(s) {
                *d += (alphas[k] - beta) * v;
            }
        }
        for d in direction.iter_mut() {
            *d = -*d;
        }

        let mut slope = dot(&grad, &direction);
        if slope.is_nan() || slope >= 0.0 {
            // Not a descent direction: restart from steepest descent.
            history.clear();
            for (d, g) in direction.iter_mut().zip(&grad) {
                *d = -g / max_norm(&grad).max(1.0);
            }
            slope = dot(&grad, &direction);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            for ((t, th), d) in trial.iter_mut().zip(&theta).zip(&direction) {
                *t = th + step * d;
            }
            let f_new = ws.eval(&trial, &mut trial_grad)?;
            if f_new.is_finite() {
                let sufficient = f_new <= f + ARMIJO * step * slope;
                // Near the optimum, objective differences drown in rounding;
                // fall back to requiring a flatter directional derivative.
                let flat = f_new <= f + 1e-12 * f.abs().max(1.0)
                    && dot(&trial_grad, &direction).abs() <= 0.9 * slope.abs();
                if sufficient || flat {
                    accepted = Some(f_new);
                    break;
                }
            }
            step *= 0.5;
        }
        let Some(f_new) = accepted else {
            if history.is_empty() {
                break;
            }
            history.clear();
            continue;
        };

        let s: Vec<f64> = trial.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = trial_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yv);
        if sy > 1e-16 * dot(&yv, &yv).max(f64::MIN_POSITIVE) {
            if history.len() == MEMORY {
                history.pop_front();
            }
            history.push_back((s, yv, 1.0 / sy));
        }
        std::mem::swap(&mut theta, &mut trial);
        std::mem::swap(&mut grad, &mut trial_grad);
        f = f_new;
        iterations += 1;
    }

    let g = max_norm(&grad);
    if !f.is_finite() || theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("logistic regression diverged".into()));
    }
    let intercept = theta.pop().unwrap();
    Ok(LogRegModel {
        weights: theta,
        intercept,
        lambda: cfg.lambda,
        trained_on: TrainedOn {
            users: x.n_rows(),
            apps: x.n_cols(),
        },
        convergence: Some(Convergence {
            converged: g <= cfg.gradient_tolerance,
            iterations,
            gradient_max_norm: g,
            objective: f,
        }),
    })
}

/// One row of a predictor table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predictor {
    pub app_index: usize,
    pub app_name: String,
    pub coefficient: f64,
    /// Fraction of the app's users with label 1.
    pub share: f64,
    /// The app's users in the training set.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorTable {
    pub rows: Vec<Predictor>,
}

/// The `k` most positive and `k` most negative coefficients.
///
/// Apps nobody in `(x, y)` uses are skipped. Equal coefficients are ordered
/// by ascending app index.
pub fn top_coefficients(
    model: &LogRegModel,
    x: &crate::sparse::SparseBinaryMatrix,
    y: &[u8],
    names: &[String],
    k: usize,
) -> Result<(PredictorTable, PredictorTable)> {
    check_len("app names vs model weights", model.weights.len(), names.len())?;
    check_len("model weights vs feature columns", model.weights.len(), x.n_cols())?;
    check_len("labels vs feature rows", x.n_rows(), y.len())?;
    check_labels(y)?;

    let mut users = vec![0usize; x.n_cols()];
    let mut positives = vec![0usize; x.n_cols()];
    for (i, &label) in y.iter().enumerate() {
        for &j in x.row(i) {
            users[j as usize] += 1;
            positives[j as usize] += label as usize;
        }
    }
    let mut candidates: Vec<usize> = (0..x.n_cols()).filter(|&j| users[j] > 0).collect();
    let k = k.min(candidates.len());
    let row = |j: usize| Predictor {
        app_index: j,
        app_name: names[j].clone(),
        coefficient: model.weights[j],
        share: positives[j] as f64 / users[j] as f64,
        n: users[j],
    };

    candidates.sort_by(|&a, &b| model.weights[b].total_cmp(&model.weights[a]).then(a.cmp(&b)));
    let positive = candidates[..k].iter().map(|&j| row(j)).collect();
    candidates.sort_by(|&a, &b| model.weights[a].total_cmp(&model.weights[b]).then(a.cmp(&b)));
    let negative = candidates[..k].iter().map(|&j| row(j)).collect();
    Ok((PredictorTable { rows: positive }, PredictorTable { rows: negative }))
}

/// On-disk model format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub lambda: f64,
    pub intercept: f64,
    pub weights: Vec<f64>,
    pub app_names: Vec<String>,
    pub trained_on: TrainedOn,
}

impl ModelDocument {
    pub fn new(model: &LogRegModel, app_names: &[String]) -> Result<Self> {
        check_len("app names vs model weights", model.weights.len(), app_names.len())?;
        Ok(Self {
            lambda: model.lambda,
            intercept: model.intercept,
            weights: model.weights.clone(),
            app_names: app_names.to_vec(),
            trained_on: model.trained_on,
        })
    }

    pub fn into_model(self) -> (LogRegModel, Vec<String>) {
        (
            LogRegModel {
                weights: self.weights,
                intercept: self.intercept,
                lambda: self.lambda,
                trained_on: self.trained_on,
                convergence: None,
            },
            self.app_names,
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
