//! Dirichlet-smoothed query-likelihood retrieval and average precision.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::{DocNo, Index, Qrels, Query, TermId};
use crate::error::{Error, Result};
use crate::tsv::{data_lines, parse_f64, read_to_string};

pub const DEFAULT_MU: f64 = 1000.0;
pub const DEFAULT_DEPTH: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct RankedEntry {
    pub doc_id: String,
    pub log_score: f64,
}

/// Top-k list, sorted by score descending then `doc_id` ascending.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankedList {
    pub query_id: String,
    pub entries: Vec<RankedEntry>,
}

impl RankedList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scores(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.log_score)
    }
}

/// The query's terms restricted to those with cf > 0, with their query
/// term frequencies, ascending by term id.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringTerms {
    pub terms: Vec<(TermId, u32)>,
    pub dropped: Vec<String>,
}

impl ScoringTerms {
    pub fn new(index: &Index, query: &Query) -> Self {
        let mut counts: BTreeMap<TermId, u32> = BTreeMap::new();
        let mut dropped = Vec::new();
        for t in &query.terms {
            match index.term_id(t) {
                Some(id) => *counts.entry(id).or_default() += 1,
                None => {
                    if !dropped.contains(t) {
                        dropped.push(t.clone())
                    }
                }
            }
        }
        Self {
            terms: counts.into_iter().collect(),
            dropped,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of scored query tokens, counting repeats.
    pub fn length(&self) -> u32 {
        self.terms.iter().map(|&(_, q)| q).sum()
    }
}

fn dirichlet_sum(index: &Index, terms: &[(TermId, u32)], tfs: &[u32], doc_len: u32, mu: f64) -> f64 {
    let denom = (doc_len as f64 + mu).ln();
    terms
        .iter()
        .zip(tfs)
        .map(|(&(t, qtf), &tf)| {
            let smoothed = tf as f64 + mu * index.collection_prob(t);
            qtf as f64 * (smoothed.ln() - denom)
        })
        .sum()
}

/// Σ qtf(t) · ln[(tf(t,d) + μ·cf(t)/|C|) / (|d| + μ)] over query terms with cf > 0.
pub fn score_dirichlet(index: &Index, query: &Query, doc_id: &str, mu: f64) -> Result<f64> {
    check_mu(mu)?;
    let doc = index
        .doc_no(doc_id)
        .ok_or_else(|| Error::UnknownDocument(doc_id.to_string()))?;
    let terms = ScoringTerms::new(index, query);
    if terms.is_empty() {
        return Err(Error::DegenerateQuery(query.query_id.clone()));
    }
    Ok(score_doc(index, &terms, doc, mu))
}

pub(crate) fn score_doc(index: &Index, terms: &ScoringTerms, doc: DocNo, mu: f64) -> f64 {
    let tfs: Vec<u32> = terms.terms.iter().map(|&(t, _)| index.tf(t, doc)).collect();
    dirichlet_sum(index, &terms.terms, &tfs, index.doc_len(doc), mu)
}

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("mu must be positive, got {mu}")))
    }
}

/// Outcome of a retrieval call. A degenerate query yields an empty list.
#[derive(Debug, Clone, PartialEq)]
pub struct Retrieval {
    pub ranked: RankedList,
    pub dropped_terms: Vec<String>,
    pub degenerate: bool,
}

/// Ranks every document containing at least one query term and keeps the top `k`.
pub fn retrieve(index: &Index, query: &Query, k: usize, mu: f64) -> Result<Retrieval> {
    check_mu(mu)?;
    if k == 0 {
        return Err(Error::invalid("retrieval depth k must be at least 1"));
    }
    let terms = ScoringTerms::new(index, query);
    if terms.is_empty() {
        return Ok(Retrieval {
            ranked: RankedList {
                query_id: query.query_id.clone(),
                entries: Vec::new(),
            },
            dropped_terms: terms.dropped,
            degenerate: true,
        });
    }
    let width = terms.terms.len();
    let mut tf_rows: HashMap<DocNo, Vec<u32>> = HashMap::new();
    for (slot, &(t, _)) in terms.terms.iter().enumerate() {
        for p in index.postings_of(t) {
            tf_rows.entry(p.doc).or_insert_with(|| vec![0; width])[slot] = p.tf;
        }
    }
    let mut scored: Vec<(DocNo, f64)> = tf_rows
        .into_iter()
        .map(|(doc, tfs)| (doc, dirichlet_sum(index, &terms.terms, &tfs, index.doc_len(doc), mu)))
        .collect();
    // Doc numbers follow doc_id order, so this is (score desc, doc_id asc).
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(Retrieval {
        ranked: RankedList {
            query_id: query.query_id.clone(),
            entries: scored
                .into_iter()
                .map(|(doc, s)| RankedEntry {
                    doc_id: index.doc_id(doc).to_string(),
                    log_score: s,
                })
                .collect(),
        },
        dropped_terms: terms.dropped,
        degenerate: false,
    })
}

/// Σ qtf(t) · ln(cf(t)/|C|) over query terms with cf > 0.
pub fn collection_likelihood(index: &Index, query: &Query) -> Result<f64> {
    let terms = ScoringTerms::new(index, query);
    if terms.is_empty() {
        return Err(Error::DegenerateQuery(query.query_id.clone()));
    }
    Ok(collection_likelihood_of(index, &terms))
}

pub(crate) fn collection_likelihood_of(index: &Index, terms: &ScoringTerms) -> f64 {
    terms
        .terms
        .iter()
        .map(|&(t, qtf)| qtf as f64 * index.collection_prob(t).ln())
        .sum()
}

/// Non-interpolated AP over the first `cutoff` ranks. R counts every
/// relevant judgment for the query, retrieved or not.
pub fn average_precision(ranked: &RankedList, qrels: &Qrels, cutoff: usize) -> Result<f64> {
    let total = qrels.num_relevant(&ranked.query_id);
    if total == 0 {
        return Err(Error::undefined(format!(
            "AP for query `{}`: no relevant documents judged",
            ranked.query_id
        )));
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, entry) in ranked.entries.iter().take(cutoff).enumerate() {
        if qrels.is_relevant(&ranked.query_id, &entry.doc_id) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Ok(sum / total as f64)
}

/// TREC six-column run lines: `qid Q0 docid rank score tag`.
pub fn format_run<'a>(lists: impl IntoIterator<Item = &'a RankedList>, tag: &str) -> String {
    let mut out = String::new();
    for list in lists {
        for (i, e) in list.entries.iter().enumerate() {
            let _ = writeln!(out, "{} Q0 {} {} {} {tag}", list.query_id, e.doc_id, i + 1, e.log_score);
        }
    }
    out
}

/// Parses a TREC run file. Entries are re-sorted into ranked-list order.
pub fn parse_run(text: &str, source: &str) -> Result<BTreeMap<String, RankedList>> {
    let mut lists: BTreeMap<String, RankedList> = BTreeMap::new();
    for (line, l) in data_lines(text) {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 6 {
            return Err(Error::parse(source, line, "expected `qid Q0 docid rank score tag`"));
        }
        let score = parse_f64(source, line, f[4])?;
        let list = lists.entry(f[0].to_string()).or_insert_with(|| RankedList {
            query_id: f[0].to_string(),
            entries: Vec::new(),
        });
        list.entries.push(RankedEntry {
            doc_id: f[2].to_string(),
            log_score: score,
        });
    }
    for list in lists.values_mut() {
        list.entries
            .sort_by(|a, b| b.log_score.total_cmp(&a.log_score).then_with(|| a.doc_id.cmp(&b.doc_id)));
    }
    Ok(lists)
}

pub fn load_run(path: &Path) -> Result<BTreeMap<String, RankedList>> {
    parse_run(&read_to_string(path)?, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_index, Document, TokenizerConfig};
    use approx::assert_abs_diff_eq;

    fn index(docs: &[(&str, &str)]) -> Index {
        let docs: Vec<Document> = docs
            .iter()
            .map(|(id, t)| Document {
                doc_id: id.to_string(),
                text: t.to_string(),
            })
            .collect();
        build_index(&docs, &TokenizerConfig::default()).unwrap()
    }

    fn q(id: &str, text: &str) -> Query {
        Query::new(id, text.split_whitespace().map(String::from).collect())
    }

    /// |C| = 10000, cf(t) = 100, target doc has |d| = 10 and tf(t) = 2.
    fn hand_example() -> Index {
        let mut docs = vec![Document {
            doc_id: "target".into(),
            text: format!("t t {}", ["x"; 8].join(" ")),
        }];
        // 49 more docs carry the remaining 98 occurrences of t; 999 docs of
        // 10 tokens plus the target give |C| = 10000.
        for i in 0..999 {
            let ts = if i < 49 { 2 } else { 0 };
            let mut toks = vec!["t"; ts];
            toks.extend(std::iter::repeat_n("x", 10 - ts));
            docs.push(Document {
                doc_id: format!("d{i:04}"),
                text: toks.join(" "),
            });
        }
        build_index(&docs, &TokenizerConfig::default()).unwrap()
    }

    #[test]
    fn dirichlet_hand_value() {
        let idx = hand_example();
        assert_eq!(idx.total_tokens(), 10_000);
        assert_eq!(idx.cf("t"), 100);
        let s = score_dirichlet(&idx, &q("q", "t"), "target", 1000.0).unwrap();
        assert_abs_diff_eq!(s, (12.0f64 / 1010.0).ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(s, -4.4328, epsilon = 1e-4);
        let cl = collection_likelihood(&idx, &q("q", "t")).unwrap();
        assert_abs_diff_eq!(cl, -4.6052, epsilon = 1e-4);
        let cl2 = collection_likelihood(&idx, &q("q", "t t")).unwrap();
        assert_abs_diff_eq!(cl2, 2.0 * cl, epsilon = 1e-12);
    }

    #[test]
    fn zero_tf_contribution() {
        let idx = index(&[("d1", "a b"), ("d2", "c c c")]);
        let p = idx.cf("a") as f64 / idx.total_tokens() as f64;
        let s = score_dirichlet(&idx, &q("q", "a"), "d2", 1000.0).unwrap();
        assert_abs_diff_eq!(s, (1000.0 * p / 1003.0).ln(), epsilon = 1e-12);
    }

    #[test]
    fn unseen_terms_dropped_and_degenerate() {
        let idx = index(&[("d1", "a b")]);
        let with_unseen = score_dirichlet(&idx, &q("q", "a zzz"), "d1", 10.0).unwrap();
        let plain = score_dirichlet(&idx, &q("q", "a"), "d1", 10.0).unwrap();
        assert_eq!(with_unseen, plain);
        assert!(matches!(
            score_dirichlet(&idx, &q("q", "zzz"), "d1", 10.0),
            Err(Error::DegenerateQuery(_))
        ));
        assert!(collection_likelihood(&idx, &q("q", "zzz")).is_err());
        let r = retrieve(&idx, &q("q", "zzz"), 10, 10.0).unwrap();
        assert!(r.degenerate && r.ranked.is_empty());
        assert_eq!(r.dropped_terms, ["zzz"]);
        assert!(score_dirichlet(&idx, &q("q", "a"), "d1", 0.0).is_err());
    }

    #[test]
    fn retrieve_orders_by_score_then_id() {
        let idx = index(&[("d1", "a a"), ("d2", "a b"), ("d3", "c d")]);
        let r = retrieve(&idx, &q("q", "a"), 10, 1000.0).unwrap();
        let ids: Vec<&str> = r.ranked.entries.iter().map(|e| e.doc_id.as_str()).collect();
        assert_eq!(ids, ["d1", "d2"]);
        let one = retrieve(&idx, &q("q", "a"), 1, 1000.0).unwrap();
        assert_eq!(one.ranked.len(), 1);
        assert!(retrieve(&idx, &q("q", "a"), 0, 1000.0).is_err());

        let tie = index(&[("b", "a x"), ("a", "a y")]);
        let r = retrieve(&tie, &q("q", "a"), 10, 1000.0).unwrap();
        assert_eq!(r.ranked.entries[0].doc_id, "a");
        assert_eq!(r.ranked.entries[0].log_score, r.ranked.entries[1].log_score);
    }

    #[test]
    fn retrieve_matches_single_doc_scoring() {
        let idx = index(&[("d1", "a b c a"), ("d2", "b b d"), ("d3", "a d d d e")]);
        let query = q("q", "a d b a");
        let r = retrieve(&idx, &query, 10, 50.0).unwrap();
        for e in &r.ranked.entries {
            assert_eq!(e.log_score, score_dirichlet(&idx, &query, &e.doc_id, 50.0).unwrap());
        }
    }

    fn list(qid: &str, docs: &[&str]) -> RankedList {
        RankedList {
            query_id: qid.into(),
            entries: docs
                .iter()
                .enumerate()
                .map(|(i, d)| RankedEntry {
                    doc_id: d.to_string(),
                    log_score: -1.5 - i as f64,
                })
                .collect(),
        }
    }

    #[test]
    fn average_precision_definition() {
        let mut qrels = Qrels::new();
        qrels.insert("q", "r1", 1);
        assert_eq!(average_precision(&list("q", &["r1", "x"]), &qrels, 1000).unwrap(), 1.0);
        assert_eq!(average_precision(&list("q", &["x", "r1"]), &qrels, 1000).unwrap(), 0.5);
        assert_eq!(average_precision(&list("q", &["x", "r1"]), &qrels, 1).unwrap(), 0.0);
        qrels.insert("q", "r2", 2);
        let ap = average_precision(&list("q", &["r1", "x", "r2"]), &qrels, 1000).unwrap();
        assert_abs_diff_eq!(ap, 0.5 * (1.0 + 2.0 / 3.0), epsilon = 1e-15);
        // Unretrieved relevant documents still count in R.
        assert_eq!(average_precision(&list("q", &["r1"]), &qrels, 1000).unwrap(), 0.5);
        assert!(matches!(
            average_precision(&list("other", &["r1"]), &qrels, 1000),
            Err(Error::Undefined(_))
        ));
    }

    #[test]
    fn run_file_round_trip() {
        let l = list("q1", &["a", "b"]);
        let text = format_run([&l], "qpp");
        assert_eq!(text.lines().next().unwrap(), "q1 Q0 a 1 -1.5 qpp");
        let back = parse_run(&text, "t").unwrap();
        assert_eq!(back["q1"], l);
    }
}
