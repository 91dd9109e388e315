//! Combining predictors with linear regression: plain least squares,
//! penalized fits with cross-validated strength, and LARS/BOLASSO variable
//! selection.

mod bolasso;
mod coordinate;
mod cv;
mod lars;
mod linear;
mod model;
mod normalize;
mod table;

use std::fmt;
use std::str::FromStr;

pub use bolasso::{bolasso, bootstrap_supports, kept_columns, BolassoConfig, BolassoFit};
pub use coordinate::{enet_fit, lasso_fit, lasso_kkt_violation, CD_MAX_SWEEPS, CD_TOLERANCE};
pub use cv::{
    cv_select, fold_partition, lambda_grid, mean_squared_error, CvSelection, Penalty, DEFAULT_GRID_SIZE,
    DEFAULT_K_FOLDS, DEFAULT_MIN_RATIO,
};
pub use lars::{lars_cv, lars_path, lars_traps, LarsPath, LarsStep};
pub use linear::{ols_fit, ridge_fit};
pub use model::{predict, RegressionModel};
pub use normalize::{minmax_fit_apply, ColumnRange, MinMax};
pub use table::{Dropped, ScoreTable, TARGET_COLUMN};

use crate::error::{Error, Result};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Combiner {
    Ols,
    RidgeCv,
    LassoCv,
    EnetCv,
    LarsCv,
    LarsTraps,
    Bolasso,
}

impl Combiner {
    pub const ALL: [Combiner; 7] = [
        Combiner::Ols,
        Combiner::RidgeCv,
        Combiner::LassoCv,
        Combiner::EnetCv,
        Combiner::LarsCv,
        Combiner::LarsTraps,
        Combiner::Bolasso,
    ];

    /// Name used in reports.
    pub fn name(&self) -> &'static str {
        match self {
            Combiner::Ols => "OLS",
            Combiner::RidgeCv => "Ridge-CV",
            Combiner::LassoCv => "LASSO-CV",
            Combiner::EnetCv => "E-Net-CV",
            Combiner::LarsCv => "LARS-CV",
            Combiner::LarsTraps => "LARS-Traps",
            Combiner::Bolasso => "BOLASSO",
        }
    }

    /// Key used in configuration files and on the command line.
    pub fn key(&self) -> &'static str {
        match self {
            Combiner::Ols => "ols",
            Combiner::RidgeCv => "ridge-cv",
            Combiner::LassoCv => "lasso-cv",
            Combiner::EnetCv => "enet-cv",
            Combiner::LarsCv => "lars-cv",
            Combiner::LarsTraps => "lars-traps",
            Combiner::Bolasso => "bolasso",
        }
    }
}

impl fmt::Display for Combiner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Combiner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Combiner::ALL
            .into_iter()
            .find(|c| c.key() == lower || c.name().to_ascii_lowercase() == lower)
            .ok_or_else(|| Error::invalid(format!("unknown combiner `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionConfig {
    pub k_folds: usize,
    pub grid_size: usize,
    pub min_ratio: f64,
    pub enet_alpha: f64,
    pub bolasso_bootstraps: usize,
    pub bolasso_threshold: f64,
    /// `None` means one trap per real column.
    pub n_traps: Option<usize>,
    pub clamp: bool,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            k_folds: DEFAULT_K_FOLDS,
            grid_size: DEFAULT_GRID_SIZE,
            min_ratio: DEFAULT_MIN_RATIO,
            enet_alpha: 0.5,
            bolasso_bootstraps: 100,
            bolasso_threshold: 1.0,
            n_traps: None,
            clamp: false,
        }
    }
}

/// Fits `combiner` on `table` (columns already normalized). Randomized
/// steps take seeds derived from `seed` and the combiner key.
pub fn fit_combiner(combiner: Combiner, table: &ScoreTable, cfg: &FusionConfig, seed: u64) -> Result<RegressionModel> {
    let task_seed = derive_seed(seed, &[combiner.key().into()]);
    let cv = |penalty: Penalty| -> Result<RegressionModel> {
        let grid = lambda_grid(table, penalty, cfg.grid_size, cfg.min_ratio)?;
        let mut model = cv_select(table, penalty, &grid, cfg.k_folds, task_seed)?.model;
        model.method = combiner.name().into();
        Ok(model)
    };
    let mut model = match combiner {
        Combiner::Ols => ols_fit(table)?,
        Combiner::RidgeCv => cv(Penalty::Ridge)?,
        Combiner::LassoCv => cv(Penalty::Lasso)?,
        Combiner::EnetCv => cv(Penalty::ElasticNet { alpha: cfg.enet_alpha })?.with_hyper("alpha", cfg.enet_alpha),
        Combiner::LarsCv => lars_cv(table, cfg.k_folds, task_seed)?.1,
        Combiner::LarsTraps => lars_traps(table, cfg.n_traps.unwrap_or(table.num_columns()).max(1), task_seed)?,
        Combiner::Bolasso => {
            let bcfg = BolassoConfig {
                bootstraps: cfg.bolasso_bootstraps,
                threshold: cfg.bolasso_threshold,
                k_folds: cfg.k_folds,
                grid_size: cfg.grid_size,
                min_ratio: cfg.min_ratio,
            };
            bolasso(table, &bcfg, task_seed)?.model
        }
    };
    model.method = combiner.name().into();
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combiner_names_round_trip() {
        for c in Combiner::ALL {
            assert_eq!(c.key().parse::<Combiner>().unwrap(), c);
            assert_eq!(c.name().parse::<Combiner>().unwrap(), c);
        }
        assert!("svm".parse::<Combiner>().is_err());
    }
}
