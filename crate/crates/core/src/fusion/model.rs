use std::fmt::Write as _;
use std::path::Path;

use super::normalize::{ColumnRange, MinMax};
use super::table::ScoreTable;
use crate::error::{Error, Result};
use crate::tsv::{data_lines, parse_f64, read_to_string};

/// A fitted linear combiner: `ŷ = intercept + Σ coefficient·x`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionModel {
    pub method: String,
    pub intercept: f64,
    pub coefficients: Vec<(String, f64)>,
    pub hyperparameters: Vec<(String, f64)>,
    /// Applied to raw inputs before the linear map.
    pub normalization: Option<MinMax>,
    pub warnings: Vec<String>,
}

impl RegressionModel {
    pub fn new(method: &str, intercept: f64, coefficients: Vec<(String, f64)>) -> Self {
        Self {
            method: method.to_string(),
            intercept,
            coefficients,
            hyperparameters: Vec::new(),
            normalization: None,
            warnings: Vec::new(),
        }
    }

    pub fn intercept_only(method: &str, intercept: f64) -> Self {
        Self::new(method, intercept, Vec::new())
    }

    pub fn with_hyper(mut self, name: &str, value: f64) -> Self {
        self.hyperparameters.push((name.to_string(), value));
        self
    }

    pub fn hyper(&self, name: &str) -> Option<f64> {
        self.hyperparameters
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }

    pub fn coefficient(&self, name: &str) -> f64 {
        self.coefficients
            .iter()
            .find(|(n, _)| n == name)
            .map_or(0.0, |(_, v)| *v)
    }

    /// Columns with a non-zero coefficient.
    pub fn support(&self) -> Vec<&str> {
        self.coefficients
            .iter()
            .filter(|(_, v)| *v != 0.0)
            .map(|(n, _)| n.as_str())
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# qpp regression model v1\n");
        let _ = writeln!(out, "method\t{}", self.method);
        let _ = writeln!(out, "intercept\t{}", self.intercept);
        for (n, v) in &self.coefficients {
            let _ = writeln!(out, "coef\t{n}\t{v}");
        }
        for (n, v) in &self.hyperparameters {
            let _ = writeln!(out, "hyper\t{n}\t{v}");
        }
        if let Some(norm) = &self.normalization {
            for r in &norm.ranges {
                let _ = writeln!(out, "norm\t{}\t{}\t{}", r.name, r.min, r.max);
            }
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning\t{}", w.replace(['\t', '\n'], " "));
        }
        out
    }

    pub fn parse(text: &str, source: &str) -> Result<RegressionModel> {
        let mut model = RegressionModel::new("", f64::NAN, Vec::new());
        let mut ranges = Vec::new();
        let mut have_method = false;
        for (line, l) in data_lines(text) {
            let f: Vec<&str> = l.split('\t').collect();
            match (f[0], f.len()) {
                ("method", 2) => {
                    model.method = f[1].to_string();
                    have_method = true;
                }
                ("intercept", 2) => model.intercept = parse_f64(source, line, f[1])?,
                ("coef", 3) => model
                    .coefficients
                    .push((f[1].to_string(), parse_f64(source, line, f[2])?)),
                ("hyper", 3) => model
                    .hyperparameters
                    .push((f[1].to_string(), parse_f64(source, line, f[2])?)),
                ("norm", 4) => ranges.push(ColumnRange {
                    name: f[1].to_string(),
                    min: parse_f64(source, line, f[2])?,
                    max: parse_f64(source, line, f[3])?,
                }),
                ("warning", 2) => model.warnings.push(f[1].to_string()),
                _ => return Err(Error::parse(source, line, format!("unrecognized model record `{l}`"))),
            }
        }
        if !have_method || model.intercept.is_nan() {
            return Err(Error::parse(source, 1, "model dump needs `method` and `intercept`"));
        }
        if !ranges.is_empty() {
            model.normalization = Some(MinMax { ranges });
        }
        Ok(model)
    }

    pub fn load(path: &Path) -> Result<RegressionModel> {
        Self::parse(&read_to_string(path)?, &path.display().to_string())
    }
}

/// Applies the model to `table`, normalizing inputs first when the model
/// carries normalization parameters. With `clamp`, predictions are cut to [0, 1].
pub fn predict(model: &RegressionModel, table: &ScoreTable, clamp: bool) -> Result<Vec<f64>> {
    let mut out = vec![model.intercept; table.num_rows()];
    for (name, beta) in &model.coefficients {
        let col = table.column_by_name(name)?;
        let range = match &model.normalization {
            Some(norm) => Some(norm.range(name).ok_or_else(|| {
                Error::invalid(format!("model has no normalization parameters for `{name}`"))
            })?),
            None => None,
        };
        for (o, &v) in out.iter_mut().zip(col) {
            let x = range.map_or(v, |r| r.apply(v));
            *o += beta * x;
        }
    }
    if clamp {
        for o in &mut out {
            *o = o.clamp(0.0, 1.0);
        }
    }
    Ok(out)
}
