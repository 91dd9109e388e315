//! k-fold cross-validated choice of a penalty strength.

use rand::seq::SliceRandom;

use super::coordinate::{check_alpha, enet_fit, lasso_fit, GramProblem};
use super::linear::{check_lambda, model_from, ridge_fit, Centered, SpectralSolver};
use super::model::{predict, RegressionModel};
use super::table::ScoreTable;
use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

pub const DEFAULT_K_FOLDS: usize = 5;
pub const DEFAULT_GRID_SIZE: usize = 50;
pub const DEFAULT_MIN_RATIO: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    Ridge,
    Lasso,
    ElasticNet { alpha: f64 },
}

impl Penalty {
    pub fn fit(&self, table: &ScoreTable, lambda: f64) -> Result<RegressionModel> {
        match *self {
            Penalty::Ridge => ridge_fit(table, lambda),
            Penalty::Lasso => lasso_fit(table, lambda),
            Penalty::ElasticNet { alpha } => enet_fit(table, lambda, alpha),
        }
    }

    /// One fit per grid value, sharing the factorization. The l1 fits run
    /// from the largest λ down, each warm-started at the previous solution.
    pub fn fit_grid(&self, table: &ScoreTable, grid: &[f64]) -> Result<Vec<RegressionModel>> {
        let centered = Centered::new(table)?;
        let (l1_share, l2_share) = match *self {
            Penalty::Ridge => {
                let solver = SpectralSolver::new(&centered);
                return Ok(grid
                    .iter()
                    .map(|&l| model_from("Ridge", table, &centered, &solver.solve(l)))
                    .collect());
            }
            Penalty::Lasso => (1.0, 0.0),
            Penalty::ElasticNet { alpha } => (alpha, 1.0 - alpha),
        };
        let problem = GramProblem::new(&centered);
        let mut order: Vec<usize> = (0..grid.len()).collect();
        order.sort_by(|&a, &b| grid[b].total_cmp(&grid[a]));
        let mut models = vec![None; grid.len()];
        let mut start: Option<Vec<f64>> = None;
        for i in order {
            let (beta, _) = problem.solve(grid[i] * l1_share, grid[i] * l2_share, start.as_deref());
            models[i] = Some(model_from("CV", table, &centered, &beta));
            start = Some(beta);
        }
        Ok(models.into_iter().map(|m| m.expect("every grid point fitted")).collect())
    }

    /// Smallest λ that zeroes every coefficient for the l1 penalties. Ridge
    /// never zeroes coefficients; it borrows the lasso value as a scale.
    pub fn lambda_max(&self, table: &ScoreTable) -> Result<f64> {
        let base = Centered::new(table)?.lambda_max();
        Ok(match *self {
            Penalty::ElasticNet { alpha } if alpha > 0.0 => base / alpha,
            _ => base,
        })
    }
}

/// `size` log-spaced values from `min_ratio·λ_max` to `λ_max`, ascending.
pub fn lambda_grid(table: &ScoreTable, penalty: Penalty, size: usize, min_ratio: f64) -> Result<Vec<f64>> {
    if size == 0 {
        return Err(Error::invalid("lambda grid needs at least one point"));
    }
    if !(min_ratio > 0.0 && min_ratio <= 1.0) {
        return Err(Error::invalid(format!("grid ratio must lie in (0, 1], got {min_ratio}")));
    }
    let max = penalty.lambda_max(table)?;
    if max == 0.0 {
        return Ok(vec![0.0]);
    }
    if size == 1 {
        return Ok(vec![max]);
    }
    let lo = (max * min_ratio).ln();
    let hi = max.ln();
    Ok((0..size)
        .map(|i| (lo + (hi - lo) * i as f64 / (size - 1) as f64).exp())
        .collect())
}

/// Seeded partition of `0..n` into `k` folds of near-equal size.
pub fn fold_partition(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::invalid(format!("cross-validation needs k ≥ 2, got {k}")));
    }
    if n / k < 2 {
        return Err(Error::invalid(format!(
            "{n} rows cannot be split into {k} folds of at least 2 rows"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(seed));
    let mut folds = vec![Vec::new(); k];
    for (i, row) in order.into_iter().enumerate() {
        folds[i % k].push(row);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

pub fn mean_squared_error(pred: &[f64], truth: &[f64]) -> f64 {
    pred.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / pred.len() as f64
}

#[derive(Debug, Clone)]
pub struct CvSelection {
    pub lambda: f64,
    pub grid: Vec<f64>,
    pub mean_mse: Vec<f64>,
    pub model: RegressionModel,
}

/// Picks the grid point with the lowest mean validation MSE (ties go to the
/// larger λ) and refits on the whole table.
pub fn cv_select(
    table: &ScoreTable,
    penalty: Penalty,
    grid: &[f64],
    k_folds: usize,
    seed: u64,
) -> Result<CvSelection> {
    if grid.is_empty() {
        return Err(Error::invalid("empty lambda grid"));
    }
    for &l in grid {
        check_lambda(l)?;
    }
    if let Penalty::ElasticNet { alpha } = penalty {
        check_alpha(alpha)?;
    }
    let n = table.num_rows();
    let folds = fold_partition(n, k_folds, seed)?;
    let mut mean_mse = vec![0.0; grid.len()];
    for fold in &folds {
        let train_rows: Vec<usize> = (0..n).filter(|r| fold.binary_search(r).is_err()).collect();
        let train = table.select_rows(&train_rows);
        let valid = table.select_rows(fold);
        let truth = valid.target()?;
        for (slot, model) in mean_mse.iter_mut().zip(penalty.fit_grid(&train, grid)?) {
            *slot += mean_squared_error(&predict(&model, &valid, false)?, truth) / folds.len() as f64;
        }
    }
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| grid[b].total_cmp(&grid[a]));
    let mut best = order[0];
    for &i in &order[1..] {
        if mean_mse[i] < mean_mse[best] - 1e-12 * mean_mse[best].max(1e-300) {
            best = i;
        }
    }
    let lambda = grid[best];
    Ok(CvSelection {
        lambda,
        grid: grid.to_vec(),
        mean_mse,
        model: penalty.fit(table, lambda)?,
    })
}
