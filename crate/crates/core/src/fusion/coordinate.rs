//! Cyclic coordinate descent for the lasso and the elastic net.
//!
//! Minimizes ½‖y − Xβ‖² + λα‖β‖₁ + ½λ(1 − α)‖β‖² on centered data, working
//! from the Gram matrix so a sweep costs O(m²) regardless of n.

use nalgebra::{DMatrix, DVector};

use super::linear::{check_lambda, model_from, Centered};
use super::model::RegressionModel;
use super::table::ScoreTable;
use crate::error::{Error, Result};

pub const CD_TOLERANCE: f64 = 1e-7;
pub const CD_MAX_SWEEPS: usize = 10_000;

pub(crate) fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// Gram-form problem data shared by every penalty on one design.
pub(crate) struct GramProblem {
    gram: DMatrix<f64>,
    xty: DVector<f64>,
}

impl GramProblem {
    pub fn new(centered: &Centered) -> Self {
        Self {
            gram: centered.x.tr_mul(&centered.x),
            xty: centered.xty(),
        }
    }

    /// Runs coordinate descent from `start` (zeros when `None`). Stops when
    /// no coefficient moves by more than the tolerance in a sweep, or after
    /// the sweep budget; the flag tells which.
    pub fn solve(&self, l1: f64, l2: f64, start: Option<&[f64]>) -> (Vec<f64>, bool) {
        let m = self.xty.len();
        let mut beta = start.map_or_else(|| vec![0.0; m], <[f64]>::to_vec);
        // grad[j] = x_jᵀ(y − Xβ), kept current across updates.
        let mut grad: Vec<f64> = (0..m)
            .map(|j| self.xty[j] - (0..m).map(|k| self.gram[(j, k)] * beta[k]).sum::<f64>())
            .collect();
        for _ in 0..CD_MAX_SWEEPS {
            let mut max_change = 0.0f64;
            for j in 0..m {
                let norm = self.gram[(j, j)];
                let old = beta[j];
                let new = if norm + l2 > 0.0 {
                    soft_threshold(grad[j] + norm * old, l1) / (norm + l2)
                } else {
                    0.0
                };
                let delta = new - old;
                if delta != 0.0 {
                    beta[j] = new;
                    for (k, g) in grad.iter_mut().enumerate() {
                        *g -= self.gram[(k, j)] * delta;
                    }
                    max_change = max_change.max(delta.abs());
                }
            }
            if max_change < CD_TOLERANCE {
                return (beta, true);
            }
        }
        (beta, false)
    }
}

/// Minimizes ½Σ(y − ŷ)² + λ‖β‖₁.
pub fn lasso_fit(table: &ScoreTable, lambda: f64) -> Result<RegressionModel> {
    check_lambda(lambda)?;
    let centered = Centered::new(table)?;
    let (beta, converged) = GramProblem::new(&centered).solve(lambda, 0.0, None);
    Ok(budget_warning(model_from("LASSO", table, &centered, &beta), converged).with_hyper("lambda", lambda))
}

/// Minimizes ½Σ(y − ŷ)² + λ(α‖β‖₁ + ½(1 − α)‖β‖²).
pub fn enet_fit(table: &ScoreTable, lambda: f64, alpha: f64) -> Result<RegressionModel> {
    check_lambda(lambda)?;
    check_alpha(alpha)?;
    let centered = Centered::new(table)?;
    let (beta, converged) = GramProblem::new(&centered).solve(lambda * alpha, lambda * (1.0 - alpha), None);
    Ok(budget_warning(model_from("E-Net", table, &centered, &beta), converged)
        .with_hyper("lambda", lambda)
        .with_hyper("alpha", alpha))
}

fn budget_warning(mut model: RegressionModel, converged: bool) -> RegressionModel {
    if !converged {
        let msg = format!("coordinate descent stopped at the {CD_MAX_SWEEPS}-sweep limit");
        log::debug!("{msg}");
        model.warnings.push(msg);
    }
    model
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::invalid(format!("alpha must lie in [0, 1], got {alpha}")))
    }
}

/// Largest violation of the lasso optimality conditions at `model`:
/// |x_jᵀr| = λ with matching sign on the support, |x_jᵀr| ≤ λ elsewhere.
pub fn lasso_kkt_violation(table: &ScoreTable, model: &RegressionModel, lambda: f64) -> Result<f64> {
    let centered = Centered::new(table)?;
    let beta: Vec<f64> = table.names().iter().map(|n| model.coefficient(n)).collect();
    let fitted = &centered.x * DVector::from_column_slice(&beta);
    let residual = &centered.y - fitted;
    let grad = centered.x.tr_mul(&residual);
    Ok(beta
        .iter()
        .zip(grad.iter())
        .map(|(&b, &g)| {
            if b != 0.0 {
                (g - lambda * b.signum()).abs()
            } else {
                (g.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max))
}
