//! Least-angle regression (without the lasso modification) and the two
//! ways of choosing where to stop on its path: random trap columns and
//! cross-validated step count.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use super::cv::{fold_partition, mean_squared_error};
use super::linear::{ols_fit, Centered};
use super::model::{predict, RegressionModel};
use super::table::ScoreTable;
use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

/// Column index that joined the active set, and the coefficients (original
/// column scale) at the end of the equiangular move that followed.
#[derive(Debug, Clone, PartialEq)]
pub struct LarsStep {
    pub entering: usize,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LarsPath {
    pub names: Vec<String>,
    pub y_mean: f64,
    pub steps: Vec<LarsStep>,
    pub warnings: Vec<String>,
}

impl LarsPath {
    /// Model after `steps` steps; 0 is the intercept-only model.
    pub fn model_at(&self, steps: usize, method: &str) -> RegressionModel {
        let coefs = match steps.min(self.steps.len()) {
            0 => (vec![0.0; self.names.len()], self.y_mean),
            s => (self.steps[s - 1].coefficients.clone(), self.steps[s - 1].intercept),
        };
        RegressionModel::new(method, coefs.1, self.names.iter().cloned().zip(coefs.0).collect())
    }

    pub fn entry_order(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.entering).collect()
    }
}

const COLLINEAR_TOL: f64 = 1e-8;
const STOP_RATIO: f64 = 1e-10;

/// Computes the LARS path on internally standardized columns (centered,
/// unit norm) and a centered target.
pub fn lars_path(table: &ScoreTable) -> Result<LarsPath> {
    let centered = Centered::new(table)?;
    let (n, m) = centered.x.shape();
    let mut warnings = Vec::new();
    let norms: Vec<f64> = (0..m).map(|j| centered.x.column(j).norm()).collect();
    let max_norm = norms.iter().copied().fold(0.0, f64::max);
    let mut xs = centered.x.clone();
    let mut excluded = vec![false; m];
    for j in 0..m {
        if norms[j] <= 1e-12 * max_norm.max(1.0) {
            excluded[j] = true;
            warnings.push(format!("column `{}` is constant and never enters", table.names()[j]));
        } else {
            xs.column_mut(j).unscale_mut(norms[j]);
        }
    }
    let y = centered.y.clone();
    let to_original = |beta_s: &[f64]| -> (f64, Vec<f64>) {
        let beta: Vec<f64> = beta_s
            .iter()
            .zip(&norms)
            .map(|(b, nm)| if *b == 0.0 { 0.0 } else { b / nm })
            .collect();
        (centered.intercept(&beta), beta)
    };

    let mut path = LarsPath {
        names: table.names().to_vec(),
        y_mean: centered.y_mean,
        steps: Vec::new(),
        warnings: Vec::new(),
    };
    let usable = excluded.iter().filter(|e| !**e).count();
    let max_active = usable.min(n.saturating_sub(1));
    let mut corr = xs.tr_mul(&y);
    let initial = corr
        .iter()
        .zip(&excluded)
        .filter(|(_, e)| !**e)
        .fold(0.0f64, |a, (c, _)| a.max(c.abs()));
    let stop_at = STOP_RATIO * initial.max(f64::MIN_POSITIVE);
    if max_active == 0 || initial <= 1e-12 * y.norm().max(f64::MIN_POSITIVE) || y.norm() == 0.0 {
        path.warnings = warnings;
        return Ok(path);
    }
    let mut next = Some(argmax_first(&corr, &excluded, &[]));
    let mut active: Vec<usize> = Vec::new();
    let mut beta_s = vec![0.0; m];
    let mut fitted = DVector::zeros(n);

    while let Some(j) = next.take() {
        active.push(j);
        let x_a = DMatrix::from_fn(n, active.len(), |r, c| xs[(r, active[c])]);
        let signs: Vec<f64> = active.iter().map(|&a| corr[a].signum()).collect();
        let c_max = active.iter().map(|&a| corr[a].abs()).fold(0.0, f64::max);
        let gram = x_a.tr_mul(&x_a);
        let chol = Cholesky::new(gram.clone())
            .ok_or_else(|| Error::invalid("LARS active set became singular"))?;

        // Drop inactive columns that are (numerically) in the active span.
        for k in 0..m {
            if active.len() >= max_active || excluded[k] || active.contains(&k) {
                continue;
            }
            let xk = xs.column(k);
            let coef = chol.solve(&x_a.tr_mul(&xk));
            let resid = (xk - &x_a * coef).norm();
            if resid < COLLINEAR_TOL {
                excluded[k] = true;
                let msg = format!(
                    "column `{}` is collinear with the active set and never enters",
                    table.names()[k]
                );
                log::debug!("{msg}");
                warnings.push(msg);
            }
        }

        let signed_gram = DMatrix::from_fn(active.len(), active.len(), |r, c| gram[(r, c)] * signs[r] * signs[c]);
        let ones = DVector::from_element(active.len(), 1.0);
        let g_inv_1 = Cholesky::new(signed_gram)
            .ok_or_else(|| Error::invalid("LARS active set became singular"))?
            .solve(&ones);
        let norm_const = 1.0 / ones.dot(&g_inv_1).sqrt();
        let w: Vec<f64> = g_inv_1.iter().map(|v| v * norm_const).collect();
        let mut u = DVector::zeros(n);
        for (c, &a) in active.iter().enumerate() {
            u += xs.column(a) * (signs[c] * w[c]);
        }
        let a_vec = xs.tr_mul(&u);

        let full = c_max / norm_const;
        let mut step = full;
        let mut candidate = None;
        if active.len() < max_active {
            for k in 0..m {
                if excluded[k] || active.contains(&k) {
                    continue;
                }
                for g in [
                    (c_max - corr[k]) / (norm_const - a_vec[k]),
                    (c_max + corr[k]) / (norm_const + a_vec[k]),
                ] {
                    if g.is_finite() && g > 1e-12 * full && g < step {
                        step = g;
                        candidate = Some(k);
                    }
                }
            }
        }

        for (c, &a) in active.iter().enumerate() {
            beta_s[a] += step * signs[c] * w[c];
        }
        fitted += &u * step;
        corr = xs.tr_mul(&(&y - &fitted));
        let (intercept, coefficients) = to_original(&beta_s);
        path.steps.push(LarsStep {
            entering: j,
            intercept,
            coefficients,
        });

        let remaining = corr
            .iter()
            .enumerate()
            .filter(|(k, _)| !excluded[*k])
            .fold(0.0f64, |acc, (_, c)| acc.max(c.abs()));
        if remaining <= stop_at {
            break;
        }
        next = candidate;
    }
    path.warnings = warnings;
    Ok(path)
}

/// Index of the largest |corr| among eligible columns; lowest index wins ties.
fn argmax_first(corr: &DVector<f64>, excluded: &[bool], active: &[usize]) -> usize {
    let eligible = |k: &usize| !excluded[*k] && !active.contains(k);
    let max = (0..corr.len())
        .filter(eligible)
        .map(|k| corr[k].abs())
        .fold(0.0, f64::max);
    (0..corr.len())
        .filter(eligible)
        .find(|&k| corr[k].abs() >= max * (1.0 - 1e-12))
        .expect("at least one eligible column")
}

/// Augments the table with `n_traps` standard-normal columns, walks the
/// LARS path until the first trap would enter, and refits OLS on the real
/// columns selected before that point.
pub fn lars_traps(table: &ScoreTable, n_traps: usize, seed: u64) -> Result<RegressionModel> {
    if n_traps == 0 {
        return Err(Error::invalid("LARS-Traps needs at least one trap column"));
    }
    let n = table.num_rows();
    let m = table.num_columns();
    let mut rng = rng_from_seed(seed);
    let mut augmented = table.clone();
    for t in 0..n_traps {
        let values: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        augmented.add_column(&format!("__trap{t}"), values)?;
    }
    let path = lars_path(&augmented)?;
    let mut selected = Vec::new();
    let mut trap_first = false;
    for step in &path.steps {
        if step.entering >= m {
            trap_first = selected.is_empty();
            break;
        }
        selected.push(step.entering);
    }
    let names: Vec<&str> = table.names().iter().map(String::as_str).collect();
    let mut model = if selected.is_empty() {
        RegressionModel::intercept_only("LARS-Traps", path.y_mean)
    } else {
        selected.sort_unstable();
        let chosen: Vec<&str> = selected.iter().map(|&j| names[j]).collect();
        let mut fit = ols_fit(&table.select_columns(&chosen)?)?;
        fit.method = "LARS-Traps".into();
        fit
    };
    model.coefficients = names
        .iter()
        .map(|n| (n.to_string(), model.coefficient(n)))
        .collect();
    if trap_first {
        model.warnings.push("a trap column entered first; intercept-only model".into());
    }
    model.warnings.extend(path.warnings.into_iter().filter(|w| !w.contains("__trap")));
    Ok(model.with_hyper("n_traps", n_traps as f64))
}

/// Chooses the number of LARS steps by k-fold validation MSE (ties go to
/// fewer steps) and returns the full-data path model at that step.
pub fn lars_cv(table: &ScoreTable, k_folds: usize, seed: u64) -> Result<(usize, RegressionModel)> {
    let full = lars_path(table)?;
    let max_steps = full.steps.len();
    let folds = fold_partition(table.num_rows(), k_folds, seed)?;
    let mut mse = vec![0.0; max_steps + 1];
    for fold in &folds {
        let train_rows: Vec<usize> = (0..table.num_rows()).filter(|r| !fold.contains(r)).collect();
        let train = table.select_rows(&train_rows);
        let valid = table.select_rows(fold);
        let path = lars_path(&train)?;
        for (s, slot) in mse.iter_mut().enumerate() {
            let pred = predict(&path.model_at(s, "LARS-CV"), &valid, false)?;
            *slot += mean_squared_error(&pred, valid.target()?) / folds.len() as f64;
        }
    }
    let mut best = 0;
    for (s, &v) in mse.iter().enumerate() {
        if v < mse[best] - 1e-12 * mse[best].max(1.0) {
            best = s;
        }
    }
    let mut model = full.model_at(best, "LARS-CV").with_hyper("steps", best as f64);
    model.warnings = full.warnings;
    Ok((best, model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn table(cols: &[Vec<f64>], y: &[f64]) -> ScoreTable {
        ScoreTable::new(
            (0..y.len()).map(|i| format!("q{i}")).collect(),
            (0..cols.len()).map(|j| format!("x{j}")).collect(),
            cols.to_vec(),
            Some(y.to_vec()),
        )
        .unwrap()
    }

    #[test]
    fn single_column_one_knot_equals_ols() {
        let t = table(&[vec![0.1, 0.5, 0.3, 0.9]], &[0.2, 0.6, 0.3, 0.8]);
        let path = lars_path(&t).unwrap();
        assert_eq!(path.steps.len(), 1);
        let ols = ols_fit(&t).unwrap();
        assert_abs_diff_eq!(path.steps[0].coefficients[0], ols.coefficient("x0"), epsilon = 1e-12);
        assert_abs_diff_eq!(path.steps[0].intercept, ols.intercept, epsilon = 1e-12);
    }

    #[test]
    fn orthonormal_entry_order_follows_correlation() {
        let c1 = vec![0.5, 0.5, -0.5, -0.5];
        let c2 = vec![0.5, -0.5, 0.5, -0.5];
        // x1ᵀy = 0.4, x2ᵀy = 1.1, so column 1 (x1) enters first.
        let y = vec![0.75, -0.35, 0.35, -0.75];
        let path = lars_path(&table(&[c1, c2], &y)).unwrap();
        assert_eq!(path.entry_order(), [1, 0]);
    }

    #[test]
    fn orthogonal_target_gives_empty_path() {
        let c1 = vec![0.5, 0.5, -0.5, -0.5];
        let y = vec![0.5, -0.5, 0.5, -0.5];
        assert!(lars_path(&table(&[c1], &y)).unwrap().steps.is_empty());
    }

    #[test]
    fn duplicate_column_never_enters() {
        let x = vec![0.1, 0.7, 0.3, 0.9, 0.4];
        let y = vec![0.2, 0.8, 0.1, 0.9, 0.5];
        let path = lars_path(&table(&[x.clone(), x, vec![0.3, 0.1, 0.2, 0.6, 0.9]], &y)).unwrap();
        assert!(!path.entry_order().contains(&1));
        assert_eq!(path.entry_order()[0], 0);
        assert!(path.warnings.iter().any(|w| w.contains("collinear")));
    }

    #[test]
    fn traps_are_seeded() {
        let x = vec![0.1, 0.7, 0.3, 0.9, 0.4, 0.2, 0.8, 0.6];
        let y: Vec<f64> = x.iter().map(|v| 0.3 * v + 0.1).collect();
        let t = table(&[x], &y);
        let a = lars_traps(&t, 2, 11).unwrap();
        assert_eq!(a, lars_traps(&t, 2, 11).unwrap());
        assert_eq!(a.support(), ["x0"]);
        assert!(lars_traps(&t, 0, 11).is_err());
    }
}
