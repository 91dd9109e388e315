//! Prediction-quality metrics: correlations with confidence intervals,
//! rank and squared errors, significance testing and the pairwise
//! predictor correlation matrix.

mod correlation;
mod errors;
mod matrix;
mod report;
mod significance;

pub use correlation::{fisher_ci, kendall_tau_b, pearson, pearson_coefficient, CorrelationResult, Z_95};
pub use errors::{average_ranks, rmse_direct, rmse_single, smare, SingleFit, Smare};
pub use matrix::{correlate, predictor_correlation_matrix, CorrMatrix, CorrMetric};
pub use report::{split_rows_tsv, EvalReport, EvalRow, REPORT_HEADER};
pub use significance::paired_t_one_sided;

use crate::error::Result;

/// τ, ρ with CI, sMARE and RMSE of predictions against AP. Correlations
/// that are undefined (constant predictions) are left empty.
pub fn evaluate_predictions(name: &str, predicted: &[f64], ap: &[f64]) -> Result<EvalRow> {
    let mut row = EvalRow::empty(name);
    row.rmse = Some(rmse_direct(predicted, ap)?);
    if predicted.len() >= 2 {
        row.tau = kendall_tau_b(predicted, ap).ok().map(|r| r.coefficient);
        row.smare = Some(smare(predicted, ap)?.value);
    }
    if let Ok(r) = pearson(predicted, ap) {
        row.rho = Some(r.coefficient);
        if let Some((lo, hi)) = r.ci {
            row.ci_low = Some(lo);
            row.ci_high = Some(hi);
        }
    }
    Ok(row)
}
