use crate::error::{Error, Result};

pub fn rmse_direct(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::invalid(format!(
            "rmse inputs differ in length ({} vs {})",
            predicted.len(),
            actual.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::invalid("rmse of empty vectors"));
    }
    let mse = predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a) * (p - a))
        .sum::<f64>()
        / predicted.len() as f64;
    Ok(mse.sqrt())
}

/// Result of fitting AP on one predictor and scoring the held-out queries.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleFit {
    pub rmse: f64,
    pub intercept: f64,
    pub slope: f64,
    /// Predictions for `test_idx`, in that order.
    pub predictions: Vec<f64>,
    /// The predictor was constant on the training rows.
    pub intercept_only: bool,
}

/// Least-squares line `ap ~ predictor` fitted on `train_idx`, RMSE on `test_idx`.
pub fn rmse_single(
    predictor: &[f64],
    ap: &[f64],
    train_idx: &[usize],
    test_idx: &[usize],
) -> Result<SingleFit> {
    if predictor.len() != ap.len() {
        return Err(Error::invalid("predictor and AP columns differ in length"));
    }
    if train_idx.is_empty() || test_idx.is_empty() {
        return Err(Error::invalid("train and test index sets must be non-empty"));
    }
    if let Some(&i) = train_idx.iter().chain(test_idx).find(|&&i| i >= ap.len()) {
        return Err(Error::invalid(format!("row index {i} out of range")));
    }
    if train_idx.iter().any(|i| test_idx.contains(i)) && train_idx != test_idx {
        return Err(Error::invalid("train and test index sets overlap"));
    }
    let n = train_idx.len() as f64;
    let mx = train_idx.iter().map(|&i| predictor[i]).sum::<f64>() / n;
    let my = train_idx.iter().map(|&i| ap[i]).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &i in train_idx {
        let dx = predictor[i] - mx;
        sxy += dx * (ap[i] - my);
        sxx += dx * dx;
    }
    let intercept_only = sxx <= 0.0;
    let slope = if intercept_only { 0.0 } else { sxy / sxx };
    let intercept = my - slope * mx;
    let predictions: Vec<f64> = test_idx
        .iter()
        .map(|&i| intercept + slope * predictor[i])
        .collect();
    let actual: Vec<f64> = test_idx.iter().map(|&i| ap[i]).collect();
    Ok(SingleFit {
        rmse: rmse_direct(&predictions, &actual)?,
        intercept,
        slope,
        predictions,
        intercept_only,
    })
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Ranks start+1 ..= end.
        let mean = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = mean;
        }
        start = end;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq)]
pub struct Smare {
    pub value: f64,
    /// |rank_pred(q) − rank_ap(q)| / n per query.
    pub per_query: Vec<f64>,
}

/// Scaled mean absolute rank error between predicted scores and AP.
pub fn smare(predicted: &[f64], ap: &[f64]) -> Result<Smare> {
    if predicted.len() != ap.len() {
        return Err(Error::invalid("sMARE inputs differ in length"));
    }
    if predicted.len() < 2 {
        return Err(Error::invalid("sMARE needs at least 2 queries"));
    }
    let n = predicted.len() as f64;
    let rp = average_ranks(predicted);
    let ra = average_ranks(ap);
    let per_query: Vec<f64> = rp.iter().zip(&ra).map(|(p, a)| (p - a).abs() / n).collect();
    Ok(Smare {
        value: per_query.iter().sum::<f64>() / n,
        per_query,
    })
}
