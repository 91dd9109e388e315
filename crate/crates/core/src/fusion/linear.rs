//! Ordinary least squares and ridge regression. Both run on centered data
//! so the intercept is never penalized.

use nalgebra::{DMatrix, DVector, SVD};

use super::model::RegressionModel;
use super::table::ScoreTable;
use crate::error::{Error, Result};

/// Centered design matrix and target with the means needed to recover the intercept.
#[derive(Debug, Clone)]
pub(crate) struct Centered {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub x_mean: Vec<f64>,
    pub y_mean: f64,
}

impl Centered {
    pub fn new(table: &ScoreTable) -> Result<Self> {
        let y = table.target()?;
        let n = table.num_rows();
        let m = table.num_columns();
        if n == 0 {
            return Err(Error::invalid("cannot fit on an empty table"));
        }
        let y_mean = y.iter().sum::<f64>() / n as f64;
        let mut x = DMatrix::zeros(n, m);
        let mut x_mean = Vec::with_capacity(m);
        for j in 0..m {
            let col = table.column(j);
            let mean = col.iter().sum::<f64>() / n as f64;
            x_mean.push(mean);
            for (i, v) in col.iter().enumerate() {
                x[(i, j)] = v - mean;
            }
        }
        Ok(Self {
            x,
            y: DVector::from_iterator(n, y.iter().map(|v| v - y_mean)),
            x_mean,
            y_mean,
        })
    }

    pub fn intercept(&self, beta: &[f64]) -> f64 {
        self.y_mean - self.x_mean.iter().zip(beta).map(|(m, b)| m * b).sum::<f64>()
    }

    /// Xᵀy of the centered data.
    pub fn xty(&self) -> DVector<f64> {
        self.x.tr_mul(&self.y)
    }

    /// max_j |x_jᵀ(y − ȳ)|, the smallest λ that zeroes every lasso coefficient.
    pub fn lambda_max(&self) -> f64 {
        self.xty().iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub(crate) fn model_from(
    method: &str,
    table: &ScoreTable,
    centered: &Centered,
    beta: &[f64],
) -> RegressionModel {
    RegressionModel::new(
        method,
        centered.intercept(beta),
        table.names().iter().cloned().zip(beta.iter().copied()).collect(),
    )
}

/// Thin SVD of the centered design, reusable across ridge penalties.
pub(crate) struct SpectralSolver {
    u_ty: DVector<f64>,
    singular: DVector<f64>,
    v: DMatrix<f64>,
    tol: f64,
}

impl SpectralSolver {
    pub fn new(centered: &Centered) -> Self {
        let (n, m) = centered.x.shape();
        if m == 0 {
            return Self {
                u_ty: DVector::zeros(0),
                singular: DVector::zeros(0),
                v: DMatrix::zeros(0, 0),
                tol: 0.0,
            };
        }
        let svd = SVD::new(centered.x.clone(), true, true);
        let u = svd.u.expect("requested U");
        let v_t = svd.v_t.expect("requested V^T");
        let s_max = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
        Self {
            u_ty: u.tr_mul(&centered.y),
            singular: svd.singular_values,
            v: v_t.transpose(),
            tol: n.max(m) as f64 * f64::EPSILON * s_max.max(f64::MIN_POSITIVE),
        }
    }

    pub fn rank(&self) -> usize {
        self.singular.iter().filter(|&&s| s > self.tol).count()
    }

    /// β = V · diag(s / (s² + λ)) · Uᵀy, dropping singular values below tolerance.
    pub fn solve(&self, lambda: f64) -> Vec<f64> {
        let m = self.v.nrows();
        let mut beta = DVector::zeros(m);
        for (k, &s) in self.singular.iter().enumerate() {
            if s <= self.tol {
                continue;
            }
            let w = if lambda == 0.0 { 1.0 / s } else { s / (s * s + lambda) };
            beta += self.v.column(k) * (w * self.u_ty[k]);
        }
        beta.iter().copied().collect()
    }
}

/// Least squares with intercept. Requires more rows than columns; a
/// rank-deficient design falls back to the minimum-norm solution.
pub fn ols_fit(table: &ScoreTable) -> Result<RegressionModel> {
    let n = table.num_rows();
    let m = table.num_columns();
    if n <= m {
        return Err(Error::invalid(format!("OLS needs more rows than columns (n = {n}, m = {m})")));
    }
    let centered = Centered::new(table)?;
    let solver = SpectralSolver::new(&centered);
    let beta = solver.solve(0.0);
    let mut model = model_from("OLS", table, &centered, &beta);
    if solver.rank() < m {
        let msg = format!("rank-deficient design (rank {} < {m}); used pseudo-inverse", solver.rank());
        log::warn!("{msg}");
        model.warnings.push(msg);
    }
    Ok(model)
}

/// Minimizes Σ(y − ŷ)² + λ‖β‖².
pub fn ridge_fit(table: &ScoreTable, lambda: f64) -> Result<RegressionModel> {
    check_lambda(lambda)?;
    let centered = Centered::new(table)?;
    let beta = SpectralSolver::new(&centered).solve(lambda);
    Ok(model_from("Ridge", table, &centered, &beta).with_hyper("lambda", lambda))
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("penalty must be a non-negative finite number, got {lambda}")))
    }
}
