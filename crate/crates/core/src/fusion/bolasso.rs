//! Bootstrap-aggregated lasso support selection.

use rand::Rng;
use rayon::prelude::*;

use super::cv::{cv_select, lambda_grid, Penalty};
use super::linear::ols_fit;
use super::model::RegressionModel;
use super::table::ScoreTable;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, PartialEq)]
pub struct BolassoConfig {
    pub bootstraps: usize,
    pub threshold: f64,
    pub k_folds: usize,
    pub grid_size: usize,
    pub min_ratio: f64,
}

impl Default for BolassoConfig {
    fn default() -> Self {
        Self {
            bootstraps: 100,
            threshold: 1.0,
            k_folds: super::cv::DEFAULT_K_FOLDS,
            grid_size: super::cv::DEFAULT_GRID_SIZE,
            min_ratio: super::cv::DEFAULT_MIN_RATIO,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BolassoFit {
    pub model: RegressionModel,
    /// Number of bootstrap supports containing each column, in table order.
    pub support_counts: Vec<usize>,
    pub kept: Vec<String>,
}

/// Support counts over `cfg.bootstraps` resamples. Each resample's seed is
/// derived from `(seed, "bolasso", b)`, so the result does not depend on
/// thread scheduling.
pub fn bootstrap_supports(table: &ScoreTable, cfg: &BolassoConfig, seed: u64) -> Result<Vec<usize>> {
    if cfg.bootstraps < 2 {
        return Err(Error::invalid(format!("BOLASSO needs at least 2 bootstraps, got {}", cfg.bootstraps)));
    }
    let n = table.num_rows();
    let supports: Vec<Vec<bool>> = (0..cfg.bootstraps)
        .into_par_iter()
        .map(|b| {
            let boot_seed = derive_seed(seed, &["bolasso".into(), b.into()]);
            let mut rng = rng_from_seed(boot_seed);
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let sample = table.select_rows(&rows);
            let grid = lambda_grid(&sample, Penalty::Lasso, cfg.grid_size, cfg.min_ratio)?;
            let fold_seed = derive_seed(boot_seed, &["folds".into()]);
            let sel = cv_select(&sample, Penalty::Lasso, &grid, cfg.k_folds, fold_seed)?;
            Ok(table.names().iter().map(|c| sel.model.coefficient(c) != 0.0).collect())
        })
        .collect::<Result<_>>()?;
    let mut counts = vec![0; table.num_columns()];
    for s in &supports {
        for (c, &on) in counts.iter_mut().zip(s) {
            *c += on as usize;
        }
    }
    Ok(counts)
}

/// Columns appearing in at least `threshold·B` supports.
pub fn kept_columns(names: &[String], counts: &[usize], bootstraps: usize, threshold: f64) -> Vec<String> {
    let need = threshold * bootstraps as f64 - 1e-9;
    names
        .iter()
        .zip(counts)
        .filter(|(_, &c)| c as f64 >= need)
        .map(|(n, _)| n.clone())
        .collect()
}

pub fn bolasso(table: &ScoreTable, cfg: &BolassoConfig, seed: u64) -> Result<BolassoFit> {
    if !(cfg.threshold > 0.0 && cfg.threshold <= 1.0) {
        return Err(Error::invalid(format!("BOLASSO threshold must lie in (0, 1], got {}", cfg.threshold)));
    }
    let counts = bootstrap_supports(table, cfg, seed)?;
    let kept = kept_columns(table.names(), &counts, cfg.bootstraps, cfg.threshold);
    let mut model = if kept.is_empty() {
        let y = table.target()?;
        RegressionModel::intercept_only("BOLASSO", y.iter().sum::<f64>() / y.len() as f64)
    } else {
        let mut fit = ols_fit(&table.select_columns(&kept)?)?;
        fit.method = "BOLASSO".into();
        fit
    };
    model.coefficients = table
        .names()
        .iter()
        .map(|n| (n.clone(), model.coefficient(n)))
        .collect();
    let model = model
        .with_hyper("bootstraps", cfg.bootstraps as f64)
        .with_hyper("threshold", cfg.threshold);
    Ok(BolassoFit {
        model,
        support_counts: counts,
        kept,
    })
}
