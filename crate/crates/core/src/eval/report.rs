use std::fmt::Write as _;

use crate::tsv::{fmt4, fmt4_opt};

/// Evaluation of one predictor or combiner.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub name: String,
    pub tau: Option<f64>,
    pub rho: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub smare: Option<f64>,
    pub rmse: Option<f64>,
    pub p_value: Option<f64>,
}

impl EvalRow {
    pub fn empty(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            tau: None,
            rho: None,
            ci_low: None,
            ci_high: None,
            smare: None,
            rmse: None,
            p_value: None,
        }
    }

    pub fn metrics(&self) -> [Option<f64>; 7] {
        [
            self.tau,
            self.rho,
            self.ci_low,
            self.ci_high,
            self.smare,
            self.rmse,
            self.p_value,
        ]
    }

    fn metrics_mut(&mut self) -> [&mut Option<f64>; 7] {
        [
            &mut self.tau,
            &mut self.rho,
            &mut self.ci_low,
            &mut self.ci_high,
            &mut self.smare,
            &mut self.rmse,
            &mut self.p_value,
        ]
    }

    /// Column-wise arithmetic mean over the rows where each value is defined.
    pub fn mean_of<'a>(name: &str, rows: impl IntoIterator<Item = &'a EvalRow>) -> EvalRow {
        let mut sums = [0.0f64; 7];
        let mut counts = [0usize; 7];
        for row in rows {
            for (k, v) in row.metrics().into_iter().enumerate() {
                if let Some(v) = v {
                    sums[k] += v;
                    counts[k] += 1;
                }
            }
        }
        let mut out = EvalRow::empty(name);
        for (k, slot) in out.metrics_mut().into_iter().enumerate() {
            *slot = (counts[k] > 0).then(|| sums[k] / counts[k] as f64);
        }
        out
    }
}

pub const REPORT_HEADER: &str = "predictor\ttau\trho\tci_low\tci_high\tsMARE\tRMSE\tp_value";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    pub fn row(&self, name: &str) -> Option<&EvalRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.name);
            for v in r.metrics() {
                out.push('\t');
                out.push_str(&fmt4_opt(v));
            }
            out.push('\n');
        }
        out
    }
}

/// Per-split rows with a leading split column.
pub fn split_rows_tsv(splits: &[EvalReport]) -> String {
    let mut out = format!("split\t{REPORT_HEADER}\n");
    for (i, report) in splits.iter().enumerate() {
        for r in &report.rows {
            let _ = write!(out, "{i}\t{}", r.name);
            for v in r.metrics() {
                out.push('\t');
                out.push_str(&v.map_or_else(|| "NA".to_string(), fmt4));
            }
            out.push('\n');
        }
    }
    out
}
