//! Predictor columns computed outside the toolkit.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tsv::{data_lines, parse_f64, read_to_string};

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalColumn {
    /// Aligned with the query ids passed to the import.
    pub values: Vec<f64>,
    /// Ids in the file that are not part of the experiment.
    pub unmatched: Vec<String>,
}

/// Parses `query_id<TAB>score` lines and aligns them with `query_ids`.
/// Every experiment query must be covered.
pub fn parse_external_scores(text: &str, source: &str, query_ids: &[String]) -> Result<ExternalColumn> {
    let mut scores = BTreeMap::new();
    for (line, l) in data_lines(text) {
        let fields: Vec<&str> = l.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::parse(source, line, "expected `query_id<TAB>score`"));
        }
        let qid = fields[0].trim();
        let v = parse_f64(source, line, fields[1])?;
        if scores.insert(qid.to_string(), v).is_some() {
            return Err(Error::parse(source, line, format!("duplicate query id `{qid}`")));
        }
    }
    let missing: Vec<&str> = query_ids
        .iter()
        .filter(|q| !scores.contains_key(q.as_str()))
        .map(String::as_str)
        .collect();
    if !missing.is_empty() {
        return Err(Error::Coverage(format!("{source} has no score for: {}", missing.join(", "))));
    }
    let values = query_ids.iter().map(|q| scores[q.as_str()]).collect();
    let unmatched = scores
        .keys()
        .filter(|k| !query_ids.contains(k))
        .cloned()
        .collect();
    Ok(ExternalColumn { values, unmatched })
}

pub fn import_external_scores(path: &Path, query_ids: &[String]) -> Result<ExternalColumn> {
    let text = read_to_string(path)?;
    parse_external_scores(&text, &path.display().to_string(), query_ids)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids() -> Vec<String> {
        vec!["q1".into(), "q2".into()]
    }

    #[test]
    fn full_coverage_aligns() {
        let col = parse_external_scores("q2\t0.5\nq1\t-1\nq9\t3\n", "t", &ids()).unwrap();
        assert_eq!(col.values, [-1.0, 0.5]);
        assert_eq!(col.unmatched, ["q9"]);
    }

    #[test]
    fn rejections() {
        let err = parse_external_scores("q1\t0.5\n", "t", &ids()).unwrap_err();
        assert!(err.to_string().contains("q2"));
        assert!(parse_external_scores("q1\t0.5\nq1\t0.6\nq2\t1\n", "t", &ids()).is_err());
        assert!(parse_external_scores("q1\tabc\nq2\t1\n", "t", &ids()).is_err());
    }
}
