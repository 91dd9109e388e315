//! Post-retrieval predictors computed from a ranked list: Clarity, WIG,
//! NQC and the utility-estimation (UEF) variants of each.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::corpus::{DocNo, Index, Query, TermId};
use crate::error::{Error, Result};
use crate::eval::{kendall_tau_b, pearson_coefficient};
use crate::retrieval::{collection_likelihood_of, RankedList, ScoringTerms};

pub const POST_PREDICTORS: [&str; 6] = ["Clarity", "WIG", "NQC", "UEF-NQC", "UEF-WIG", "UEF-Clarity"];

/// How UEF compares the original and relevance-model score vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ListSimilarity {
    #[default]
    Pearson,
    Kendall,
}

impl FromStr for ListSimilarity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pearson" => Ok(ListSimilarity::Pearson),
            "kendall" => Ok(ListSimilarity::Kendall),
            other => Err(Error::invalid(format!("unknown list similarity `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostConfig {
    pub mu: f64,
    /// Feedback depth for the relevance model (Clarity, UEF).
    pub k_fb: usize,
    pub wig_k: usize,
    pub nqc_k: usize,
    /// Number of documents UEF re-ranks.
    pub uef_m: usize,
    pub similarity: ListSimilarity,
}

impl Default for PostConfig {
    fn default() -> Self {
        Self {
            mu: crate::retrieval::DEFAULT_MU,
            k_fb: 100,
            wig_k: 5,
            nqc_k: 100,
            uef_m: 100,
            similarity: ListSimilarity::Pearson,
        }
    }
}

/// P(t|R) over the vocabulary of the feedback documents.
#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceModel {
    /// Ascending by term id.
    pub probs: Vec<(TermId, f64)>,
    pub feedback_depth: usize,
}

impl RelevanceModel {
    pub fn mass(&self) -> f64 {
        self.probs.iter().map(|(_, p)| p).sum()
    }

    pub fn prob(&self, index: &Index, term: &str) -> f64 {
        index
            .term_id(term)
            .and_then(|t| self.probs.binary_search_by_key(&t, |(id, _)| *id).ok())
            .map_or(0.0, |i| self.probs[i].1)
    }
}

fn resolve_docs(index: &Index, ranked: &RankedList, depth: usize) -> Result<Vec<(DocNo, f64)>> {
    ranked
        .entries
        .iter()
        .take(depth)
        .map(|e| {
            index
                .doc_no(&e.doc_id)
                .map(|d| (d, e.log_score))
                .ok_or_else(|| Error::UnknownDocument(e.doc_id.clone()))
        })
        .collect()
}

/// Dirichlet-smoothed P(t|d).
fn doc_prob(index: &Index, term: TermId, doc: DocNo, mu: f64) -> f64 {
    (index.tf(term, doc) as f64 + mu * index.collection_prob(term)) / (index.doc_len(doc) as f64 + mu)
}

/// RM1: P(t|R) = Σ_d P(t|d)·w(d) over the top `k_fb` documents, where
/// w(d) is the softmax of the retrieval log scores, renormalized over the
/// feedback vocabulary.
pub fn rm1(index: &Index, ranked: &RankedList, k_fb: usize, mu: f64) -> Result<RelevanceModel> {
    if k_fb == 0 {
        return Err(Error::invalid("feedback depth must be at least 1"));
    }
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::invalid(format!("mu must be non-negative, got {mu}")));
    }
    let docs = resolve_docs(index, ranked, k_fb)?;
    if docs.is_empty() {
        return Err(Error::invalid(format!(
            "relevance model for `{}`: empty ranked list",
            ranked.query_id
        )));
    }
    let max = docs.iter().map(|d| d.1).fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = docs.iter().map(|d| (d.1 - max).exp()).collect();
    let z: f64 = raw.iter().sum();
    let mut vocab: BTreeMap<TermId, f64> = BTreeMap::new();
    for &(doc, _) in &docs {
        for &(t, _) in index.doc_terms(doc) {
            vocab.insert(t, 0.0);
        }
    }
    for ((doc, _), w) in docs.iter().zip(&raw) {
        let w = w / z;
        for (t, p) in vocab.iter_mut() {
            *p += w * doc_prob(index, *t, *doc, mu);
        }
    }
    let mass: f64 = vocab.values().sum();
    Ok(RelevanceModel {
        probs: vocab.into_iter().map(|(t, p)| (t, p / mass)).collect(),
        feedback_depth: docs.len(),
    })
}

/// KL divergence (bits) of the relevance model from the collection model.
pub fn clarity_of(index: &Index, model: &RelevanceModel) -> f64 {
    model
        .probs
        .iter()
        .filter(|(_, p)| *p > 0.0)
        .map(|&(t, p)| p * (p / index.collection_prob(t)).log2())
        .sum()
}

pub fn clarity(index: &Index, _query: &Query, ranked: &RankedList, k_fb: usize, mu: f64) -> Result<f64> {
    Ok(clarity_of(index, &rm1(index, ranked, k_fb, mu)?))
}

fn scoring_terms(index: &Index, query: &Query) -> Result<ScoringTerms> {
    let terms = ScoringTerms::new(index, query);
    if terms.is_empty() {
        return Err(Error::DegenerateQuery(query.query_id.clone()));
    }
    Ok(terms)
}

/// Mean gap between the top-k scores and the collection likelihood,
/// scaled by 1/sqrt(|q|) where |q| counts scored query tokens.
pub fn wig(index: &Index, query: &Query, ranked: &RankedList, k: usize) -> Result<f64> {
    let terms = scoring_terms(index, query)?;
    if ranked.is_empty() || k == 0 {
        return Err(Error::invalid(format!("WIG for `{}`: empty ranked list", query.query_id)));
    }
    let cl = collection_likelihood_of(index, &terms);
    let top: Vec<f64> = ranked.scores().take(k).collect();
    let gap: f64 = top.iter().map(|s| s - cl).sum();
    Ok(gap / (top.len() as f64 * (terms.length() as f64).sqrt()))
}

/// Population standard deviation of the top-k scores normalized by
/// |collection likelihood|. Lists with fewer than two entries give 0.
pub fn nqc(index: &Index, query: &Query, ranked: &RankedList, k: usize) -> Result<f64> {
    let terms = scoring_terms(index, query)?;
    let cl = collection_likelihood_of(index, &terms);
    if cl == 0.0 {
        return Err(Error::undefined(format!(
            "NQC for `{}`: zero collection likelihood",
            query.query_id
        )));
    }
    let top: Vec<f64> = ranked.scores().take(k).collect();
    if top.len() < 2 {
        return Ok(0.0);
    }
    let n = top.len() as f64;
    let mean = top.iter().sum::<f64>() / n;
    let var = top.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
    Ok(var.sqrt() / cl.abs())
}

/// Σ_t P(t|R) · ln P(t|d) with Dirichlet-smoothed P(t|d).
pub fn rm_score(index: &Index, model: &RelevanceModel, doc: DocNo, mu: f64) -> f64 {
    model
        .probs
        .iter()
        .map(|&(t, p)| p * doc_prob(index, t, doc, mu).ln())
        .sum()
}

/// Similarity between the original scores of the top `m` documents and
/// their relevance-model scores.
pub fn rerank_similarity(
    index: &Index,
    ranked: &RankedList,
    model: &RelevanceModel,
    m: usize,
    mu: f64,
    similarity: ListSimilarity,
) -> Result<f64> {
    let docs = resolve_docs(index, ranked, m)?;
    if docs.len() < 2 {
        return Err(Error::undefined(format!(
            "UEF for `{}`: fewer than two documents to compare",
            ranked.query_id
        )));
    }
    let original: Vec<f64> = docs.iter().map(|d| d.1).collect();
    let reranked: Vec<f64> = docs.iter().map(|d| rm_score(index, model, d.0, mu)).collect();
    let sim = match similarity {
        ListSimilarity::Pearson => pearson_coefficient(&original, &reranked),
        ListSimilarity::Kendall => kendall_tau_b(&original, &reranked).ok().map(|r| r.coefficient),
    };
    sim.ok_or_else(|| {
        Error::undefined(format!(
            "UEF for `{}`: zero variance in a score vector",
            ranked.query_id
        ))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UefBase {
    Nqc,
    Wig,
    Clarity,
}

/// UEF value together with its two factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UefScore {
    pub value: f64,
    pub similarity: f64,
    pub base: f64,
}

pub fn uef(
    index: &Index,
    query: &Query,
    ranked: &RankedList,
    base: UefBase,
    config: &PostConfig,
) -> Result<UefScore> {
    let model = rm1(index, ranked, config.k_fb, config.mu)?;
    let base_value = match base {
        UefBase::Nqc => nqc(index, query, ranked, config.nqc_k)?,
        UefBase::Wig => wig(index, query, ranked, config.wig_k)?,
        UefBase::Clarity => clarity_of(index, &model),
    };
    let similarity = rerank_similarity(index, ranked, &model, config.uef_m, config.mu, config.similarity)?;
    Ok(UefScore {
        value: similarity * base_value,
        similarity,
        base: base_value,
    })
}

/// The six post-retrieval predictors. UEF entries are `None` when the
/// list similarity is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct PostScores {
    pub query_id: String,
    pub clarity: f64,
    pub wig: f64,
    pub nqc: f64,
    pub uef_nqc: Option<f64>,
    pub uef_wig: Option<f64>,
    pub uef_clarity: Option<f64>,
    pub rm_mass: f64,
    pub warnings: Vec<String>,
}

impl PostScores {
    pub fn compute(index: &Index, query: &Query, ranked: &RankedList, config: &PostConfig) -> Result<Self> {
        let mut warnings = Vec::new();
        let model = rm1(index, ranked, config.k_fb, config.mu)?;
        let clarity = clarity_of(index, &model);
        let wig = wig(index, query, ranked, config.wig_k)?;
        let nqc = nqc(index, query, ranked, config.nqc_k)?;
        if ranked.len() < 2 {
            warnings.push("NQC set to 0: fewer than two retrieved documents".to_string());
        }
        let sim = match rerank_similarity(index, ranked, &model, config.uef_m, config.mu, config.similarity) {
            Ok(s) => Some(s),
            Err(Error::Undefined(msg)) => {
                warnings.push(msg);
                None
            }
            Err(e) => return Err(e),
        };
        Ok(PostScores {
            query_id: query.query_id.clone(),
            clarity,
            wig,
            nqc,
            uef_nqc: sim.map(|s| s * nqc),
            uef_wig: sim.map(|s| s * wig),
            uef_clarity: sim.map(|s| s * clarity),
            rm_mass: model.mass(),
            warnings,
        })
    }

    /// Values in [`POST_PREDICTORS`] order.
    pub fn values(&self) -> [Option<f64>; 6] {
        [
            Some(self.clarity),
            Some(self.wig),
            Some(self.nqc),
            self.uef_nqc,
            self.uef_wig,
            self.uef_clarity,
        ]
    }

    pub fn named(&self) -> impl Iterator<Item = (&'static str, Option<f64>)> {
        POST_PREDICTORS.into_iter().zip(self.values())
    }
}

impl fmt::Display for UefBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UefBase::Nqc => "NQC",
            UefBase::Wig => "WIG",
            UefBase::Clarity => "Clarity",
        })
    }
}
