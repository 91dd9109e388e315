//! Documents, queries, relevance judgments and the inverted index.

mod index;
mod ingest;
pub mod snapshot;
mod tokenize;

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

pub use index::{build_index, DocNo, Index, Posting, TermId};
pub use ingest::{ingest, parse_documents, DocFormat};
pub use tokenize::{tokenize, Tokenizer, TokenizerConfig};

use crate::error::{Error, Result};
use crate::tsv::{data_lines, read_to_string};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub query_id: String,
    /// Tokens in original order, duplicates kept.
    pub terms: Vec<String>,
}

impl Query {
    pub fn new(query_id: impl Into<String>, terms: Vec<String>) -> Self {
        Self {
            query_id: query_id.into(),
            terms,
        }
    }

    pub fn from_text(query_id: impl Into<String>, text: &str, tokenizer: &Tokenizer) -> Self {
        Self::new(query_id, tokenizer.tokenize(text))
    }

    /// A query whose text tokenized to nothing.
    pub fn is_degenerate(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Parses a `query_id<TAB>text` file.
pub fn parse_queries(text: &str, tokenizer: &Tokenizer, source: &str) -> Result<Vec<Query>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, l) in data_lines(text) {
        let (id, body) = l
            .split_once('\t')
            .ok_or_else(|| Error::parse(source, line, "expected `query_id<TAB>text`"))?;
        let id = id.trim();
        if id.is_empty() {
            return Err(Error::parse(source, line, "empty query id"));
        }
        if !seen.insert(id.to_string()) {
            return Err(Error::DuplicateId(id.to_string()));
        }
        out.push(Query::from_text(id, body, tokenizer));
    }
    Ok(out)
}

pub fn load_queries(path: &Path, tokenizer: &Tokenizer) -> Result<Vec<Query>> {
    parse_queries(&read_to_string(path)?, tokenizer, &path.display().to_string())
}

/// Graded relevance judgments. Absent pairs have grade 0.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    judgments: BTreeMap<String, BTreeMap<String, u32>>,
}

impl Qrels {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, query_id: &str, doc_id: &str, grade: u32) {
        self.judgments
            .entry(query_id.to_string())
            .or_default()
            .insert(doc_id.to_string(), grade);
    }

    pub fn grade(&self, query_id: &str, doc_id: &str) -> u32 {
        self.judgments
            .get(query_id)
            .and_then(|m| m.get(doc_id))
            .copied()
            .unwrap_or(0)
    }

    /// Grade > 0 counts as relevant.
    pub fn is_relevant(&self, query_id: &str, doc_id: &str) -> bool {
        self.grade(query_id, doc_id) > 0
    }

    pub fn num_relevant(&self, query_id: &str) -> usize {
        self.judgments
            .get(query_id)
            .map_or(0, |m| m.values().filter(|&&g| g > 0).count())
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &str> {
        self.judgments.keys().map(String::as_str)
    }

    /// Parses TREC `qid iter docid grade` lines.
    pub fn parse(text: &str, source: &str) -> Result<Qrels> {
        let mut qrels = Qrels::new();
        for (line, l) in data_lines(text) {
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 4 {
                return Err(Error::parse(source, line, "expected `qid 0 docid grade`"));
            }
            let grade: i64 = f[3]
                .parse()
                .map_err(|_| Error::parse(source, line, format!("bad grade `{}`", f[3])))?;
            // Negative grades (e.g. spam markers) are judged non-relevant.
            qrels.insert(f[0], f[2], grade.max(0) as u32);
        }
        Ok(qrels)
    }

    pub fn load(path: &Path) -> Result<Qrels> {
        Self::parse(&read_to_string(path)?, &path.display().to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Senses {
    pub total: u32,
    pub noun: u32,
}

/// Term -> sense counts, typically exported from WordNet.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SenseLexicon {
    entries: BTreeMap<String, Senses>,
}

impl SenseLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, term: &str, total: u32, noun: u32) -> Result<()> {
        if noun > total {
            return Err(Error::invalid(format!(
                "lexicon entry `{term}` has more noun senses ({noun}) than senses ({total})"
            )));
        }
        self.entries.insert(term.to_string(), Senses { total, noun });
        Ok(())
    }

    pub fn get(&self, term: &str) -> Option<Senses> {
        self.entries.get(term).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses `term<TAB>total_senses<TAB>noun_senses`.
    pub fn parse(text: &str, source: &str) -> Result<SenseLexicon> {
        let mut lex = SenseLexicon::new();
        for (line, l) in data_lines(text) {
            let f: Vec<&str> = l.split('\t').collect();
            if f.len() != 3 {
                return Err(Error::parse(source, line, "expected `term<TAB>total<TAB>noun`"));
            }
            let n = |s: &str| -> Result<u32> {
                s.trim()
                    .parse()
                    .map_err(|_| Error::parse(source, line, format!("bad sense count `{s}`")))
            };
            lex.insert(f[0].trim(), n(f[1])?, n(f[2])?)
                .map_err(|e| Error::parse(source, line, e.to_string()))?;
        }
        Ok(lex)
    }

    pub fn load(path: &Path) -> Result<SenseLexicon> {
        Self::parse(&read_to_string(path)?, &path.display().to_string())
    }
}
