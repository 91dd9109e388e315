use super::table::ScoreTable;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnRange {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

impl ColumnRange {
    pub fn is_constant(&self) -> bool {
        self.max <= self.min
    }

    /// Maps into [0, 1] with clamping; constant columns map to 0.
    pub fn apply(&self, v: f64) -> f64 {
        if self.is_constant() {
            0.0
        } else {
            ((v - self.min) / (self.max - self.min)).clamp(0.0, 1.0)
        }
    }
}

/// Per-column min-max parameters learned on a training table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MinMax {
    pub ranges: Vec<ColumnRange>,
}

impl MinMax {
    pub fn fit(table: &ScoreTable) -> MinMax {
        let ranges = table
            .names()
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let col = table.column(i);
                ColumnRange {
                    name: name.clone(),
                    min: col.iter().copied().fold(f64::INFINITY, f64::min),
                    max: col.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                }
            })
            .collect();
        MinMax { ranges }
    }

    pub fn range(&self, name: &str) -> Option<&ColumnRange> {
        self.ranges.iter().find(|r| r.name == name)
    }

    /// Names of columns that were constant on the fitting table.
    pub fn constant_columns(&self) -> Vec<&str> {
        self.ranges
            .iter()
            .filter(|r| r.is_constant())
            .map(|r| r.name.as_str())
            .collect()
    }

    /// Normalizes every column of `table` that has fitted parameters.
    pub fn apply(&self, table: &ScoreTable) -> Result<ScoreTable> {
        let names = table.names().to_vec();
        let mut columns = Vec::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            let col = table.column(i);
            columns.push(match self.range(name) {
                Some(r) => col.iter().map(|&v| r.apply(v)).collect(),
                None => col.to_vec(),
            });
        }
        let target = table.has_target().then(|| table.target().unwrap().to_vec());
        ScoreTable::new(table.query_ids().to_vec(), names, columns, target)
    }
}

/// Fits min-max on `train` and applies it to both tables.
pub fn minmax_fit_apply(train: &ScoreTable, test: &ScoreTable) -> Result<(ScoreTable, ScoreTable, MinMax)> {
    let params = MinMax::fit(train);
    for name in params.constant_columns() {
        log::warn!("column `{name}` is constant on the training rows; normalized to 0");
    }
    Ok((params.apply(train)?, params.apply(test)?, params))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_col(values: &[f64]) -> ScoreTable {
        ScoreTable::new(
            (0..values.len()).map(|i| format!("q{i}")).collect(),
            vec!["x".into()],
            vec![values.to_vec()],
            None,
        )
        .unwrap()
    }

    #[test]
    fn examples() {
        let (train, test, params) = minmax_fit_apply(&one_col(&[1.0, 3.0, 5.0]), &one_col(&[7.0, -1.0, 2.0])).unwrap();
        assert_eq!(train.column(0), [0.0, 0.5, 1.0]);
        assert_eq!(test.column(0), [1.0, 0.0, 0.25]);
        assert!(params.constant_columns().is_empty());

        let (train, _, params) = minmax_fit_apply(&one_col(&[2.0, 2.0]), &one_col(&[3.0])).unwrap();
        assert_eq!(train.column(0), [0.0, 0.0]);
        assert_eq!(params.constant_columns(), ["x"]);
    }
}
