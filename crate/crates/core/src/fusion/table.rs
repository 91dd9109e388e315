use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tsv::{data_lines, parse_f64, read_to_string};

pub const TARGET_COLUMN: &str = "AP";

/// Rows are queries, columns are named predictors; the optional target is
/// the AP of each query.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    query_ids: Vec<String>,
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    target: Option<Vec<f64>>,
}

/// Queries removed while assembling a table, with the reason.
pub type Dropped = Vec<(String, String)>;

impl ScoreTable {
    pub fn new(
        query_ids: Vec<String>,
        names: Vec<String>,
        columns: Vec<Vec<f64>>,
        target: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = query_ids.len();
        if names.len() != columns.len() {
            return Err(Error::invalid("column names and columns differ in count"));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if name == TARGET_COLUMN || name == "query_id" {
                return Err(Error::invalid(format!("reserved column name `{name}`")));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateId(name.clone()));
            }
        }
        let mut ids = HashSet::new();
        for q in &query_ids {
            if !ids.insert(q.as_str()) {
                return Err(Error::DuplicateId(q.clone()));
            }
        }
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::invalid(format!("column `{name}` has {} rows, expected {n}", col.len())));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("column `{name}` has non-finite values")));
            }
        }
        if let Some(t) = &target {
            if t.len() != n || t.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("target must be finite and aligned with the rows"));
            }
        }
        Ok(Self {
            query_ids,
            names,
            columns,
            target,
        })
    }

    /// Builds a table from per-query cells, dropping any query with an
    /// undefined predictor cell.
    pub fn from_rows(
        query_ids: Vec<String>,
        names: Vec<String>,
        rows: Vec<Vec<Option<f64>>>,
        target: Option<Vec<f64>>,
    ) -> Result<(Self, Dropped)> {
        let mut keep_ids = Vec::new();
        let mut keep_target = Vec::new();
        let mut columns = vec![Vec::new(); names.len()];
        let mut dropped = Vec::new();
        for (i, (qid, row)) in query_ids.into_iter().zip(rows).enumerate() {
            if row.len() != names.len() {
                return Err(Error::invalid(format!("row `{qid}` has {} cells", row.len())));
            }
            let missing: Vec<&str> = names
                .iter()
                .zip(&row)
                .filter(|(_, v)| !v.is_some_and(f64::is_finite))
                .map(|(n, _)| n.as_str())
                .collect();
            if !missing.is_empty() {
                dropped.push((qid, format!("undefined predictor(s): {}", missing.join(","))));
                continue;
            }
            for (col, v) in columns.iter_mut().zip(row) {
                col.push(v.unwrap());
            }
            if let Some(t) = &target {
                keep_target.push(t[i]);
            }
            keep_ids.push(qid);
        }
        let target = target.map(|_| keep_target);
        Ok((Self::new(keep_ids, names, columns, target)?, dropped))
    }

    pub fn num_rows(&self) -> usize {
        self.query_ids.len()
    }

    pub fn num_columns(&self) -> usize {
        self.names.len()
    }

    pub fn query_ids(&self) -> &[String] {
        &self.query_ids
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column_by_name(&self, name: &str) -> Result<&[f64]> {
        self.column_index(name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    pub fn target(&self) -> Result<&[f64]> {
        self.target
            .as_deref()
            .ok_or_else(|| Error::MissingColumn(TARGET_COLUMN.to_string()))
    }

    pub fn has_target(&self) -> bool {
        self.target.is_some()
    }

    pub fn with_target(mut self, target: Vec<f64>) -> Result<Self> {
        if target.len() != self.num_rows() {
            return Err(Error::invalid("target length does not match the table"));
        }
        self.target = Some(target);
        Self::new(self.query_ids, self.names, self.columns, self.target)
    }

    pub fn add_column(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        let mut names = self.names.clone();
        names.push(name.to_string());
        let mut columns = self.columns.clone();
        columns.push(values);
        *self = Self::new(self.query_ids.clone(), names, columns, self.target.clone())?;
        Ok(())
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    pub fn select_rows(&self, rows: &[usize]) -> ScoreTable {
        ScoreTable {
            query_ids: rows.iter().map(|&r| self.query_ids[r].clone()).collect(),
            names: self.names.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| rows.iter().map(|&r| c[r]).collect())
                .collect(),
            target: self
                .target
                .as_ref()
                .map(|t| rows.iter().map(|&r| t[r]).collect()),
        }
    }

    /// Row positions of the given query ids.
    pub fn rows_of(&self, ids: &[String]) -> Result<Vec<usize>> {
        ids.iter()
            .map(|id| {
                self.query_ids
                    .iter()
                    .position(|q| q == id)
                    .ok_or_else(|| Error::invalid(format!("query `{id}` not in table")))
            })
            .collect()
    }

    pub fn select_columns<S: AsRef<str>>(&self, names: &[S]) -> Result<ScoreTable> {
        let mut columns = Vec::with_capacity(names.len());
        for n in names {
            columns.push(self.column_by_name(n.as_ref())?.to_vec());
        }
        Self::new(
            self.query_ids.clone(),
            names.iter().map(|n| n.as_ref().to_string()).collect(),
            columns,
            self.target.clone(),
        )
    }

    /// Wide TSV: `query_id`, one column per predictor, then `AP` when present.
    /// Values use the shortest representation that round-trips exactly.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("query_id");
        for n in &self.names {
            out.push('\t');
            out.push_str(n);
        }
        if self.target.is_some() {
            out.push('\t');
            out.push_str(TARGET_COLUMN);
        }
        out.push('\n');
        for (i, q) in self.query_ids.iter().enumerate() {
            out.push_str(q);
            for c in &self.columns {
                let _ = write!(out, "\t{}", c[i]);
            }
            if let Some(t) = &self.target {
                let _ = write!(out, "\t{}", t[i]);
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_tsv(text: &str, source: &str) -> Result<ScoreTable> {
        let mut lines = data_lines(text);
        let (hline, header) = lines
            .next()
            .ok_or_else(|| Error::parse(source, 1, "empty table"))?;
        let head: Vec<&str> = header.split('\t').collect();
        if head[0] != "query_id" {
            return Err(Error::parse(source, hline, "first column must be `query_id`"));
        }
        let target_at = head.iter().position(|h| *h == TARGET_COLUMN);
        let names: Vec<String> = head[1..]
            .iter()
            .filter(|h| **h != TARGET_COLUMN)
            .map(|h| h.to_string())
            .collect();
        let mut ids = Vec::new();
        let mut columns = vec![Vec::new(); names.len()];
        let mut target = Vec::new();
        for (line, l) in lines {
            let f: Vec<&str> = l.split('\t').collect();
            if f.len() != head.len() {
                return Err(Error::parse(source, line, format!("expected {} fields, got {}", head.len(), f.len())));
            }
            ids.push(f[0].to_string());
            let mut c = 0;
            for (k, field) in f.iter().enumerate().skip(1) {
                let v = parse_f64(source, line, field)?;
                if Some(k) == target_at {
                    target.push(v);
                } else {
                    columns[c].push(v);
                    c += 1;
                }
            }
        }
        Self::new(ids, names, columns, target_at.map(|_| target))
    }

    pub fn load(path: &Path) -> Result<ScoreTable> {
        Self::parse_tsv(&read_to_string(path)?, &path.display().to_string())
    }
}
