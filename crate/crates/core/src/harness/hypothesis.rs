//! Descriptive check of which correlation regime a predictor family falls
//! into and whether fusion helped, hurt or did nothing.

use std::fmt::{self, Write as _};

use super::config::HypothesisThresholds;
use crate::eval::{CorrMatrix, EvalRow};
use crate::tsv::fmt4_opt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Predictors agree with each other; fusion is expected to add little.
    H1,
    /// Predictors are weakly related; fusion is expected to help.
    H2,
    /// A share of pairs conflict; fusion is expected to hurt.
    H3,
    Intermediate,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Improvement,
    NoChange,
    Degradation,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::H1 => "H1",
            Regime::H2 => "H2",
            Regime::H3 => "H3",
            Regime::Intermediate => "intermediate",
            Regime::Undetermined => "undetermined",
        })
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Improvement => "improvement",
            Outcome::NoChange => "no-change",
            Outcome::Degradation => "degradation",
        })
    }
}

/// Best single predictor against best combiner on one metric. `delta` is
/// positive when the combiner is better, whatever the metric's direction.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricDelta {
    pub metric: &'static str,
    pub best_single: Option<(String, f64)>,
    pub best_combined: Option<(String, f64)>,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub pairs: usize,
    pub mean_rho: Option<f64>,
    pub min_rho: Option<f64>,
    pub negative_fraction: Option<f64>,
    pub deltas: Vec<MetricDelta>,
    pub regime: Regime,
    /// Judged on the Pearson ρ delta.
    pub outcome: Option<Outcome>,
    /// The outcome is the one the regime's hypothesis predicts.
    pub consistent: bool,
}

fn best(rows: &[EvalRow], get: fn(&EvalRow) -> Option<f64>, higher_better: bool) -> Option<(String, f64)> {
    let mut out: Option<(String, f64)> = None;
    for r in rows {
        if let Some(v) = get(r) {
            let better = match &out {
                None => true,
                Some((_, b)) => if higher_better { v > *b } else { v < *b },
            };
            if better {
                out = Some((r.name.clone(), v));
            }
        }
    }
    out
}

pub fn hypothesis_report(
    matrix: &CorrMatrix,
    singles: &[EvalRow],
    combined: &[EvalRow],
    thresholds: &HypothesisThresholds,
) -> HypothesisReport {
    let rhos = matrix.off_diagonal();
    let pairs = rhos.len();
    let (mean_rho, min_rho, negative_fraction) = if pairs == 0 {
        (None, None, None)
    } else {
        let neg = rhos.iter().filter(|&&r| r < thresholds.negative_rho).count();
        (
            Some(rhos.iter().sum::<f64>() / pairs as f64),
            Some(rhos.iter().copied().fold(f64::INFINITY, f64::min)),
            Some(neg as f64 / pairs as f64),
        )
    };
    let regime = match (mean_rho, negative_fraction) {
        (Some(_), Some(f)) if f >= thresholds.h3_min_fraction => Regime::H3,
        (Some(m), _) if m >= thresholds.h1_min_mean => Regime::H1,
        (Some(m), _) if m < thresholds.h2_max_mean => Regime::H2,
        (Some(_), _) => Regime::Intermediate,
        _ => Regime::Undetermined,
    };

    let specs: [(&'static str, fn(&EvalRow) -> Option<f64>, bool); 4] = [
        ("tau", |r| r.tau, true),
        ("rho", |r| r.rho, true),
        ("sMARE", |r| r.smare, false),
        ("RMSE", |r| r.rmse, false),
    ];
    let deltas: Vec<MetricDelta> = specs
        .iter()
        .map(|&(metric, get, higher)| {
            let s = best(singles, get, higher);
            let c = best(combined, get, higher);
            let delta = match (&s, &c) {
                (Some((_, a)), Some((_, b))) => Some(if higher { b - a } else { a - b }),
                _ => None,
            };
            MetricDelta {
                metric,
                best_single: s,
                best_combined: c,
                delta,
            }
        })
        .collect();
    let outcome = deltas[1].delta.map(|d| {
        if d > thresholds.delta_tolerance {
            Outcome::Improvement
        } else if d < -thresholds.delta_tolerance {
            Outcome::Degradation
        } else {
            Outcome::NoChange
        }
    });
    let consistent = matches!(
        (regime, outcome),
        (Regime::H1, Some(Outcome::NoChange))
            | (Regime::H2, Some(Outcome::Improvement))
            | (Regime::H3, Some(Outcome::Degradation))
    );
    HypothesisReport {
        pairs,
        mean_rho,
        min_rho,
        negative_fraction,
        deltas,
        regime,
        outcome,
        consistent,
    }
}

impl HypothesisReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("key\tvalue\n");
        let _ = writeln!(out, "pairs\t{}", self.pairs);
        let _ = writeln!(out, "mean_rho\t{}", fmt4_opt(self.mean_rho));
        let _ = writeln!(out, "min_rho\t{}", fmt4_opt(self.min_rho));
        let _ = writeln!(out, "negative_fraction\t{}", fmt4_opt(self.negative_fraction));
        for d in &self.deltas {
            let name = |b: &Option<(String, f64)>| b.as_ref().map_or("NA".to_string(), |(n, _)| n.clone());
            let _ = writeln!(out, "best_single_{}\t{}", d.metric, name(&d.best_single));
            let _ = writeln!(out, "best_combined_{}\t{}", d.metric, name(&d.best_combined));
            let _ = writeln!(out, "delta_{}\t{}", d.metric, fmt4_opt(d.delta));
        }
        let _ = writeln!(out, "regime\t{}", self.regime);
        let _ = writeln!(
            out,
            "outcome\t{}",
            self.outcome.map_or("NA".to_string(), |o| o.to_string())
        );
        let _ = writeln!(out, "consistent\t{}", self.consistent);
        out
    }
}
