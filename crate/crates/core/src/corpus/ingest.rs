use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde_json::Value;

use super::Document;
use crate::error::{Error, Result};
use crate::tsv::read_to_string;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocFormat {
    /// One `{"id": ..., "text": ...}` object per line.
    Jsonl,
    /// `<DOC><DOCNO>..</DOCNO><TEXT>..</TEXT></DOC>` records.
    Trec,
    /// `doc_id<TAB>text`.
    Tsv,
}

impl FromStr for DocFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" => Ok(DocFormat::Jsonl),
            "trec" => Ok(DocFormat::Trec),
            "tsv" => Ok(DocFormat::Tsv),
            other => Err(Error::invalid(format!("unknown document format `{other}`"))),
        }
    }
}

impl fmt::Display for DocFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DocFormat::Jsonl => "jsonl",
            DocFormat::Trec => "trec",
            DocFormat::Tsv => "tsv",
        })
    }
}

/// Reads every document from `path`, preserving file order.
pub fn ingest(path: &Path, format: DocFormat) -> Result<Vec<Document>> {
    let text = read_to_string(path)?;
    parse_documents(&text, format, &path.display().to_string())
}

pub fn parse_documents(text: &str, format: DocFormat, source: &str) -> Result<Vec<Document>> {
    let records = match format {
        DocFormat::Jsonl => parse_jsonl(text, source)?,
        DocFormat::Tsv => parse_tsv(text, source)?,
        DocFormat::Trec => parse_trec(text, source)?,
    };
    let mut seen = HashSet::new();
    for doc in &records {
        if !seen.insert(doc.doc_id.as_str()) {
            return Err(Error::DuplicateId(doc.doc_id.clone()));
        }
    }
    Ok(records)
}

fn parse_jsonl(text: &str, source: &str) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(line)
            .map_err(|e| Error::parse(source, lineno, format!("invalid JSON: {e}")))?;
        let field = |name: &str| -> Result<String> {
            match value.get(name) {
                Some(Value::String(s)) => Ok(s.clone()),
                Some(Value::Number(n)) if name == "id" => Ok(n.to_string()),
                _ => Err(Error::parse(source, lineno, format!("missing string field `{name}`"))),
            }
        };
        let doc_id = field("id")?;
        if doc_id.is_empty() {
            return Err(Error::parse(source, lineno, "empty document id"));
        }
        docs.push(Document {
            doc_id,
            text: field("text")?,
        });
    }
    Ok(docs)
}

fn parse_tsv(text: &str, source: &str) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let (id, body) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(source, i + 1, "expected `doc_id<TAB>text`"))?;
        if id.trim().is_empty() {
            return Err(Error::parse(source, i + 1, "empty document id"));
        }
        docs.push(Document {
            doc_id: id.trim().to_string(),
            text: body.to_string(),
        });
    }
    Ok(docs)
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset].bytes().filter(|&b| b == b'\n').count() + 1
}

fn between<'a>(body: &'a str, open: &str, close: &str) -> Option<&'a str> {
    let start = body.find(open)? + open.len();
    let end = body[start..].find(close)? + start;
    Some(&body[start..end])
}

fn strip_tags(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut in_tag = false;
    for c in s.chars() {
        match c {
            '<' => in_tag = true,
            '>' if in_tag => {
                in_tag = false;
                out.push(' ');
            }
            c if !in_tag => out.push(c),
            _ => {}
        }
    }
    out
}

fn parse_trec(text: &str, source: &str) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut cursor = 0;
    while let Some(rel) = text[cursor..].find("<DOC>") {
        let start = cursor + rel;
        let body_start = start + "<DOC>".len();
        let end = text[body_start..]
            .find("</DOC>")
            .map(|e| body_start + e)
            .ok_or_else(|| Error::parse(source, line_of(text, start), "unterminated <DOC>"))?;
        let body = &text[body_start..end];
        let doc_id = between(body, "<DOCNO>", "</DOCNO>")
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::parse(source, line_of(text, start), "missing <DOCNO>"))?
            .to_string();
        let text_part = match between(body, "<TEXT>", "</TEXT>") {
            Some(t) => strip_tags(t),
            None => {
                let without_docno = body.replacen(
                    &format!("<DOCNO>{}</DOCNO>", between(body, "<DOCNO>", "</DOCNO>").unwrap_or("")),
                    "",
                    1,
                );
                strip_tags(&without_docno)
            }
        };
        docs.push(Document {
            doc_id,
            text: text_part.trim().to_string(),
        });
        cursor = end + "</DOC>".len();
    }
    if docs.is_empty() && !text.trim().is_empty() {
        return Err(Error::parse(source, 1, "no <DOC> records found"));
    }
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_maps_fields() {
        let docs = parse_documents(r#"{"id":"d1","text":"a b"}"#, DocFormat::Jsonl, "t").unwrap();
        assert_eq!(
            docs,
            vec![Document {
                doc_id: "d1".into(),
                text: "a b".into()
            }]
        );
    }

    #[test]
    fn empty_file_is_empty_corpus() {
        for f in [DocFormat::Jsonl, DocFormat::Tsv, DocFormat::Trec] {
            assert!(parse_documents("", f, "t").unwrap().is_empty());
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let src = "{\"id\":\"d1\",\"text\":\"a\"}\n{\"id\":\"d1\",\"text\":\"b\"}\n";
        assert!(matches!(
            parse_documents(src, DocFormat::Jsonl, "t"),
            Err(Error::DuplicateId(id)) if id == "d1"
        ));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let src = "{\"id\":\"d1\",\"text\":\"a\"}\n\n{oops\n";
        match parse_documents(src, DocFormat::Jsonl, "docs.jsonl") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        match parse_documents("d1\tx\nno-tab-here\n", DocFormat::Tsv, "docs.tsv") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn trec_records() {
        let src = "<DOC>\n<DOCNO> FT1 </DOCNO>\n<TEXT>\nHello <B>world</B>\n</TEXT>\n</DOC>\n\
                   <DOC><DOCNO>FT2</DOCNO><HEADLINE>Only headline</HEADLINE></DOC>";
        let docs = parse_documents(src, DocFormat::Trec, "t").unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].doc_id, "FT1");
        assert_eq!(docs[0].text.split_whitespace().collect::<Vec<_>>(), ["Hello", "world"]);
        assert_eq!(docs[1].text, "Only headline");
        assert!(parse_documents("<DOC><TEXT>x</TEXT></DOC>", DocFormat::Trec, "t").is_err());
        match parse_documents("\n\n<DOC><DOCNO>a</DOCNO>", DocFormat::Trec, "t") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
