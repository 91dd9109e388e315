//! Shared helpers for the tab-separated report formats.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Fixed four-decimal rendering used by every report. Negative zero and
/// values that round to it print as `0.0000`.
pub fn fmt4(value: f64) -> String {
    if value.is_nan() {
        return "NA".to_string();
    }
    let s = format!("{value:.4}");
    if s == "-0.0000" {
        "0.0000".to_string()
    } else {
        s
    }
}

pub fn fmt4_opt(value: Option<f64>) -> String {
    value.map_or_else(|| "NA".to_string(), fmt4)
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(contents.as_bytes())
        .map_err(|e| Error::io(path, e))
}

/// Non-blank, non-comment lines with their 1-based line numbers.
pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

pub(crate) fn parse_f64(path: &str, line: usize, field: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::parse(path, line, format!("not a number: `{field}`")))?;
    if !v.is_finite() {
        return Err(Error::parse(path, line, format!("non-finite value `{field}`")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_decimals() {
        assert_eq!(fmt4(0.57804), "0.5780");
        assert_eq!(fmt4(-0.00001), "0.0000");
        assert_eq!(fmt4(f64::NAN), "NA");
        assert_eq!(fmt4_opt(None), "NA");
    }
}
