use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use super::tokenize::{Tokenizer, TokenizerConfig};
use super::Document;
use crate::error::{Error, Result};
use crate::tsv::data_lines;

/// Dense document number. Numbers follow ascending `doc_id` order, so
/// ordering by number is ordering by id.
pub type DocNo = u32;
pub type TermId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc: DocNo,
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct TermEntry {
    pub(crate) term: String,
    pub(crate) cf: u64,
    pub(crate) postings: Vec<Posting>,
}

/// Immutable in-memory inverted index with the collection statistics the
/// predictors need.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Index {
    pub(crate) tokenizer: TokenizerConfig,
    pub(crate) doc_ids: Vec<String>,
    pub(crate) doc_lens: Vec<u32>,
    pub(crate) total_tokens: u64,
    /// Sorted by term string.
    pub(crate) terms: Vec<TermEntry>,
    pub(crate) term_lookup: HashMap<String, TermId>,
    pub(crate) doc_lookup: HashMap<String, DocNo>,
    /// Per document: (term, tf) sorted by term id.
    pub(crate) forward: Vec<Vec<(TermId, u32)>>,
}

impl Index {
    pub fn build(docs: &[Document], config: &TokenizerConfig) -> Result<Index> {
        if docs.is_empty() {
            return Err(Error::invalid("cannot index an empty document list"));
        }
        let tokenizer = Tokenizer::new(config.clone());
        let mut sorted: Vec<&Document> = docs.iter().collect();
        sorted.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
        if let Some(w) = sorted.windows(2).find(|w| w[0].doc_id == w[1].doc_id) {
            return Err(Error::DuplicateId(w[0].doc_id.clone()));
        }

        let mut per_term: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        let mut doc_lens = Vec::with_capacity(sorted.len());
        for (no, doc) in sorted.iter().enumerate() {
            let mut counts: BTreeMap<String, u32> = BTreeMap::new();
            let tokens = tokenizer.tokenize(&doc.text);
            doc_lens.push(tokens.len() as u32);
            for t in tokens {
                *counts.entry(t).or_default() += 1;
            }
            for (term, tf) in counts {
                per_term.entry(term).or_default().push(Posting {
                    doc: no as DocNo,
                    tf,
                });
            }
        }
        let total_tokens: u64 = doc_lens.iter().map(|&l| l as u64).sum();
        if total_tokens == 0 {
            return Err(Error::EmptyIndex);
        }
        let terms = per_term
            .into_iter()
            .map(|(term, postings)| TermEntry {
                cf: postings.iter().map(|p| p.tf as u64).sum(),
                term,
                postings,
            })
            .collect();
        Ok(Self::assemble(
            config.clone(),
            sorted.iter().map(|d| d.doc_id.clone()).collect(),
            doc_lens,
            terms,
        ))
    }

    /// Builds lookups and the forward index from the primary tables.
    pub(crate) fn assemble(
        tokenizer: TokenizerConfig,
        doc_ids: Vec<String>,
        doc_lens: Vec<u32>,
        terms: Vec<TermEntry>,
    ) -> Index {
        let total_tokens = doc_lens.iter().map(|&l| l as u64).sum();
        let term_lookup = terms
            .iter()
            .enumerate()
            .map(|(i, e)| (e.term.clone(), i as TermId))
            .collect();
        let doc_lookup = doc_ids
            .iter()
            .enumerate()
            .map(|(i, d)| (d.clone(), i as DocNo))
            .collect();
        let mut forward = vec![Vec::new(); doc_ids.len()];
        for (tid, entry) in terms.iter().enumerate() {
            for p in &entry.postings {
                forward[p.doc as usize].push((tid as TermId, p.tf));
            }
        }
        Index {
            tokenizer,
            doc_ids,
            doc_lens,
            total_tokens,
            terms,
            term_lookup,
            doc_lookup,
            forward,
        }
    }

    pub fn tokenizer_config(&self) -> &TokenizerConfig {
        &self.tokenizer
    }

    /// N.
    pub fn num_docs(&self) -> usize {
        self.doc_ids.len()
    }

    /// |C|.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn doc_id(&self, doc: DocNo) -> &str {
        &self.doc_ids[doc as usize]
    }

    pub fn doc_no(&self, doc_id: &str) -> Option<DocNo> {
        self.doc_lookup.get(doc_id).copied()
    }

    pub fn doc_len(&self, doc: DocNo) -> u32 {
        self.doc_lens[doc as usize]
    }

    pub fn doc_len_by_id(&self, doc_id: &str) -> Option<u32> {
        self.doc_no(doc_id).map(|d| self.doc_len(d))
    }

    pub fn term_id(&self, term: &str) -> Option<TermId> {
        self.term_lookup.get(term).copied()
    }

    pub fn term(&self, id: TermId) -> &str {
        &self.terms[id as usize].term
    }

    /// Document frequency; 0 for unseen terms.
    pub fn df(&self, term: &str) -> u64 {
        self.term_id(term)
            .map_or(0, |t| self.terms[t as usize].postings.len() as u64)
    }

    /// Collection frequency; 0 for unseen terms.
    pub fn cf(&self, term: &str) -> u64 {
        self.term_id(term).map_or(0, |t| self.terms[t as usize].cf)
    }

    pub fn cf_of(&self, id: TermId) -> u64 {
        self.terms[id as usize].cf
    }

    pub fn df_of(&self, id: TermId) -> u64 {
        self.terms[id as usize].postings.len() as u64
    }

    /// cf(t)/|C|.
    pub fn collection_prob(&self, id: TermId) -> f64 {
        self.cf_of(id) as f64 / self.total_tokens as f64
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.term_id(term)
            .map_or(&[][..], |t| &self.terms[t as usize].postings)
    }

    pub fn postings_of(&self, id: TermId) -> &[Posting] {
        &self.terms[id as usize].postings
    }

    pub fn tf(&self, id: TermId, doc: DocNo) -> u32 {
        let postings = self.postings_of(id);
        postings
            .binary_search_by_key(&doc, |p| p.doc)
            .map_or(0, |i| postings[i].tf)
    }

    /// (term, tf) pairs of a document, ascending by term id.
    pub fn doc_terms(&self, doc: DocNo) -> &[(TermId, u32)] {
        &self.forward[doc as usize]
    }

    pub fn terms(&self) -> impl Iterator<Item = (TermId, &str)> {
        self.terms
            .iter()
            .enumerate()
            .map(|(i, e)| (i as TermId, e.term.as_str()))
    }

    /// Plain-text statistics dump. Contains everything the predictors
    /// read, so [`Index::from_stats_dump`] reproduces them exactly.
    pub fn stats_dump(&self) -> String {
        let mut out = String::new();
        out.push_str("# qpp index stats v1\n");
        let _ = writeln!(out, "N\t{}", self.num_docs());
        let _ = writeln!(out, "C\t{}", self.total_tokens);
        for (id, len) in self.doc_ids.iter().zip(&self.doc_lens) {
            let _ = writeln!(out, "doc\t{id}\t{len}");
        }
        for entry in &self.terms {
            let _ = writeln!(
                out,
                "term\t{}\t{}\t{}",
                entry.term,
                entry.postings.len(),
                entry.cf
            );
            for p in &entry.postings {
                let _ = writeln!(
                    out,
                    "posting\t{}\t{}\t{}",
                    entry.term, self.doc_ids[p.doc as usize], p.tf
                );
            }
        }
        out
    }

    /// Rebuilds an index from [`Index::stats_dump`] output and checks the
    /// recorded totals. The tokenizer configuration is not part of the dump
    /// and must be supplied.
    pub fn from_stats_dump(text: &str, tokenizer: TokenizerConfig) -> Result<Index> {
        let src = "stats dump";
        let mut n_decl = None;
        let mut c_decl = None;
        let mut doc_ids: Vec<String> = Vec::new();
        let mut doc_lens = Vec::new();
        let mut doc_lookup: HashMap<String, DocNo> = HashMap::new();
        let mut terms: Vec<TermEntry> = Vec::new();
        let mut declared: Vec<(u64, u64)> = Vec::new();
        for (line, l) in data_lines(text) {
            let f: Vec<&str> = l.split('\t').collect();
            let num = |s: &str| -> Result<u64> {
                s.parse()
                    .map_err(|_| Error::parse(src, line, format!("bad integer `{s}`")))
            };
            match (f[0], f.len()) {
                ("N", 2) => n_decl = Some(num(f[1])?),
                ("C", 2) => c_decl = Some(num(f[1])?),
                ("doc", 3) => {
                    let no = doc_ids.len() as DocNo;
                    if doc_lookup.insert(f[1].to_string(), no).is_some() {
                        return Err(Error::DuplicateId(f[1].to_string()));
                    }
                    if let Some(prev) = doc_ids.last() {
                        if prev.as_str() >= f[1] {
                            return Err(Error::parse(src, line, "documents not in ascending id order"));
                        }
                    }
                    doc_ids.push(f[1].to_string());
                    doc_lens.push(num(f[2])? as u32);
                }
                ("term", 4) => {
                    if let Some(prev) = terms.last() {
                        if prev.term.as_str() >= f[1] {
                            return Err(Error::parse(src, line, "terms not in ascending order"));
                        }
                    }
                    terms.push(TermEntry {
                        term: f[1].to_string(),
                        cf: 0,
                        postings: Vec::new(),
                    });
                    declared.push((num(f[2])?, num(f[3])?));
                }
                ("posting", 4) => {
                    let entry = terms
                        .last_mut()
                        .filter(|e| e.term == f[1])
                        .ok_or_else(|| Error::parse(src, line, "posting outside its term block"))?;
                    let doc = *doc_lookup
                        .get(f[2])
                        .ok_or_else(|| Error::UnknownDocument(f[2].to_string()))?;
                    if entry.postings.last().is_some_and(|p| p.doc >= doc) {
                        return Err(Error::parse(src, line, "postings not ascending"));
                    }
                    let tf = num(f[3])? as u32;
                    if tf == 0 {
                        return Err(Error::parse(src, line, "zero tf posting"));
                    }
                    entry.cf += tf as u64;
                    entry.postings.push(Posting { doc, tf });
                }
                _ => return Err(Error::parse(src, line, format!("unrecognized record `{l}`"))),
            }
        }
        for (entry, (df, cf)) in terms.iter().zip(&declared) {
            if entry.postings.len() as u64 != *df || entry.cf != *cf {
                return Err(Error::Snapshot(format!(
                    "term `{}` declares df={df} cf={cf} but postings give df={} cf={}",
                    entry.term,
                    entry.postings.len(),
                    entry.cf
                )));
            }
        }
        let index = Self::assemble(tokenizer, doc_ids, doc_lens, terms);
        if n_decl != Some(index.num_docs() as u64) || c_decl != Some(index.total_tokens) {
            return Err(Error::Snapshot("declared N or |C| does not match records".into()));
        }
        Ok(index)
    }
}

/// Free-function form of [`Index::build`].
pub fn build_index(docs: &[Document], config: &TokenizerConfig) -> Result<Index> {
    Index::build(docs, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, text: &str) -> Document {
        Document {
            doc_id: id.into(),
            text: text.into(),
        }
    }

    fn two_doc() -> Index {
        build_index(&[doc("d1", "a b"), doc("d2", "a")], &TokenizerConfig::default()).unwrap()
    }

    #[test]
    fn hand_counted_statistics() {
        let idx = two_doc();
        assert_eq!(idx.num_docs(), 2);
        assert_eq!(idx.total_tokens(), 3);
        assert_eq!((idx.df("a"), idx.cf("a")), (2, 2));
        assert_eq!((idx.df("b"), idx.cf("b")), (1, 1));
        assert_eq!(idx.doc_len_by_id("d1"), Some(2));
        let a: Vec<(&str, u32)> = idx
            .postings("a")
            .iter()
            .map(|p| (idx.doc_id(p.doc), p.tf))
            .collect();
        assert_eq!(a, [("d1", 1), ("d2", 1)]);
    }

    #[test]
    fn repeated_term() {
        let idx = build_index(&[doc("x", "a a a")], &TokenizerConfig::default()).unwrap();
        assert_eq!((idx.df("a"), idx.cf("a")), (1, 3));
    }

    #[test]
    fn doc_numbers_follow_id_order() {
        let idx = build_index(&[doc("z", "a"), doc("b", "a"), doc("m", "a")], &Default::default()).unwrap();
        assert_eq!(idx.doc_id(0), "b");
        assert_eq!(idx.doc_id(2), "z");
        assert_eq!(idx.doc_no("m"), Some(1));
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(build_index(&[], &Default::default()).is_err());
        assert!(matches!(
            build_index(&[doc("d", "  ,, ")], &Default::default()),
            Err(Error::EmptyIndex)
        ));
    }

    #[test]
    fn stats_dump_round_trip() {
        let idx = build_index(
            &[doc("d1", "the cat sat"), doc("d2", "the cat"), doc("d3", "")],
            &Default::default(),
        )
        .unwrap();
        let back = Index::from_stats_dump(&idx.stats_dump(), TokenizerConfig::default()).unwrap();
        assert_eq!(back, idx);
    }

    #[test]
    fn stats_dump_detects_tampering() {
        let dump = two_doc().stats_dump().replace("term\ta\t2\t2", "term\ta\t2\t5");
        assert!(Index::from_stats_dump(&dump, Default::default()).is_err());
    }
}
