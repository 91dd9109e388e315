use std::fmt::{self, Write as _};
use std::str::FromStr;

use super::correlation::{kendall_tau_b, pearson_coefficient};
use crate::error::{Error, Result};
use crate::fusion::ScoreTable;
use crate::tsv::fmt4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrMetric {
    Pearson,
    Kendall,
}

impl FromStr for CorrMetric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pearson" | "rho" => Ok(CorrMetric::Pearson),
            "kendall" | "tau" => Ok(CorrMetric::Kendall),
            other => Err(Error::invalid(format!("unknown correlation metric `{other}`"))),
        }
    }
}

impl fmt::Display for CorrMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorrMetric::Pearson => "pearson",
            CorrMetric::Kendall => "kendall",
        })
    }
}

/// Correlation of two columns under `metric`; `None` when undefined.
pub fn correlate(metric: CorrMetric, a: &[f64], b: &[f64]) -> Option<f64> {
    match metric {
        CorrMetric::Pearson => pearson_coefficient(a, b),
        CorrMetric::Kendall => kendall_tau_b(a, b).ok().map(|r| r.coefficient),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrMatrix {
    pub metric: CorrMetric,
    pub names: Vec<String>,
    /// Row-major; `None` marks an undefined cell.
    pub cells: Vec<Vec<Option<f64>>>,
    /// (row, col, reason) for every undefined cell with row ≤ col.
    pub missing: Vec<(usize, usize, String)>,
}

impl CorrMatrix {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.cells[i][j]
    }

    /// Defined off-diagonal coefficients of the upper triangle.
    pub fn off_diagonal(&self) -> Vec<f64> {
        let n = self.names.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter_map(|(i, j)| self.cells[i][j])
            .collect()
    }

    /// Header row and column of predictor names; undefined cells print `NA`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("predictor");
        for n in &self.names {
            out.push('\t');
            out.push_str(n);
        }
        out.push('\n');
        for (name, row) in self.names.iter().zip(&self.cells) {
            out.push_str(name);
            for cell in row {
                let _ = write!(out, "\t{}", cell.map_or_else(|| "NA".to_string(), fmt4));
            }
            out.push('\n');
        }
        out
    }
}

/// Pairwise correlation of every predictor column of `table`.
pub fn predictor_correlation_matrix(table: &ScoreTable, metric: CorrMetric) -> Result<CorrMatrix> {
    let m = table.num_columns();
    if m < 2 {
        return Err(Error::invalid("correlation matrix needs at least 2 predictor columns"));
    }
    let mut cells = vec![vec![None; m]; m];
    let mut missing = Vec::new();
    for i in 0..m {
        for j in i..m {
            let value = if i == j {
                correlate(metric, table.column(i), table.column(i)).map(|_| 1.0)
            } else {
                correlate(metric, table.column(i), table.column(j))
            };
            if value.is_none() {
                missing.push((i, j, "constant column".to_string()));
            }
            cells[i][j] = value;
            cells[j][i] = value;
        }
    }
    Ok(CorrMatrix {
        metric,
        names: table.names().to_vec(),
        cells,
        missing,
    })
}
