//! Pre-retrieval predictors: IDF, SCQ and VAR families plus polysemy.
//!
//! Per-term values are aggregated over the *scored* terms of a query, i.e.
//! terms that occur in the index (or, for polysemy, in the lexicon).
//! Terms are visited in sorted order so that results are independent of
//! query term order down to the last bit.

use crate::corpus::{Index, Query, SenseLexicon, TermId};

pub const PRE_PREDICTORS: [&str; 10] = [
    "AvgIDF", "MaxIDF", "SumSCQ", "AvgSCQ", "MaxSCQ", "SumVAR", "AvgVAR", "MaxVAR", "AvP", "AvNP",
];

/// How repeated query terms are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TermSemantics {
    /// Each distinct term once.
    #[default]
    Set,
    /// Every occurrence.
    Multiset,
}

/// Sum, mean and max of a per-term quantity over scored terms. All zero
/// when no term was scored.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TermFamily {
    pub sum: f64,
    pub avg: f64,
    pub max: f64,
    pub scored: usize,
}

impl TermFamily {
    fn from_values(values: impl IntoIterator<Item = f64>) -> Self {
        let mut family = TermFamily::default();
        let mut max = f64::NEG_INFINITY;
        for v in values {
            family.sum += v;
            family.scored += 1;
            max = max.max(v);
        }
        if family.scored > 0 {
            family.avg = family.sum / family.scored as f64;
            family.max = max;
        }
        family
    }

    pub fn is_degenerate(&self) -> bool {
        self.scored == 0
    }
}

fn query_terms(query: &Query, semantics: TermSemantics) -> Vec<&str> {
    let mut terms: Vec<&str> = query.terms.iter().map(String::as_str).collect();
    terms.sort_unstable();
    if semantics == TermSemantics::Set {
        terms.dedup();
    }
    terms
}

fn indexed_terms(index: &Index, query: &Query, semantics: TermSemantics) -> Vec<TermId> {
    query_terms(query, semantics)
        .into_iter()
        .filter_map(|t| index.term_id(t))
        .collect()
}

/// ln(N / df(t)).
pub fn idf(index: &Index, term: TermId) -> f64 {
    (index.num_docs() as f64 / index.df_of(term) as f64).ln()
}

/// (1 + ln cf(t)) · ln(1 + N / df(t)).
pub fn scq(index: &Index, term: TermId) -> f64 {
    let n = index.num_docs() as f64;
    (1.0 + (index.cf_of(term) as f64).ln()) * (1.0 + n / index.df_of(term) as f64).ln()
}

/// Population standard deviation of w(t,d) = (1 + ln tf) · ln(N/df) over
/// the documents containing `term`.
pub fn term_weight_std(index: &Index, term: TermId) -> f64 {
    let postings = index.postings_of(term);
    if postings.len() < 2 {
        return 0.0;
    }
    let idf = idf(index, term);
    let weights: Vec<f64> = postings
        .iter()
        .map(|p| (1.0 + (p.tf as f64).ln()) * idf)
        .collect();
    let n = weights.len() as f64;
    let mean = weights.iter().sum::<f64>() / n;
    let var = weights.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / n;
    var.sqrt()
}

pub fn idf_family(index: &Index, query: &Query, semantics: TermSemantics) -> TermFamily {
    TermFamily::from_values(indexed_terms(index, query, semantics).into_iter().map(|t| idf(index, t)))
}

pub fn scq_family(index: &Index, query: &Query, semantics: TermSemantics) -> TermFamily {
    TermFamily::from_values(indexed_terms(index, query, semantics).into_iter().map(|t| scq(index, t)))
}

pub fn var_family(index: &Index, query: &Query, semantics: TermSemantics) -> TermFamily {
    TermFamily::from_values(
        indexed_terms(index, query, semantics)
            .into_iter()
            .map(|t| term_weight_std(index, t)),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Polysemy {
    pub avp: f64,
    pub avnp: f64,
    /// Query terms found in the lexicon.
    pub matched: usize,
}

/// Mean total and noun sense counts over query terms present in the lexicon.
pub fn polysemy(query: &Query, lexicon: &SenseLexicon, semantics: TermSemantics) -> Polysemy {
    let senses: Vec<_> = query_terms(query, semantics)
        .into_iter()
        .filter_map(|t| lexicon.get(t))
        .collect();
    if senses.is_empty() {
        return Polysemy::default();
    }
    let n = senses.len() as f64;
    Polysemy {
        avp: senses.iter().map(|s| s.total as f64).sum::<f64>() / n,
        avnp: senses.iter().map(|s| s.noun as f64).sum::<f64>() / n,
        matched: senses.len(),
    }
}

/// All ten pre-retrieval predictors for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct PreScores {
    pub query_id: String,
    pub idf: TermFamily,
    pub scq: TermFamily,
    pub var: TermFamily,
    pub polysemy: Polysemy,
    pub warnings: Vec<String>,
}

impl PreScores {
    pub fn compute(
        index: &Index,
        query: &Query,
        lexicon: Option<&SenseLexicon>,
        semantics: TermSemantics,
    ) -> Self {
        let idf = idf_family(index, query, semantics);
        let mut warnings = Vec::new();
        if idf.is_degenerate() {
            warnings.push("no query term occurs in the index".to_string());
        }
        let polysemy = match lexicon {
            Some(lex) => polysemy(query, lex, semantics),
            None => Polysemy::default(),
        };
        if polysemy.matched == 0 {
            warnings.push("no query term found in the sense lexicon".to_string());
        }
        PreScores {
            query_id: query.query_id.clone(),
            idf,
            scq: scq_family(index, query, semantics),
            var: var_family(index, query, semantics),
            polysemy,
            warnings,
        }
    }

    /// True when no query term is indexed, so every collection-based value is a placeholder.
    pub fn is_degenerate(&self) -> bool {
        self.idf.is_degenerate()
    }

    /// Values in [`PRE_PREDICTORS`] order.
    pub fn values(&self) -> [f64; 10] {
        [
            self.idf.avg,
            self.idf.max,
            self.scq.sum,
            self.scq.avg,
            self.scq.max,
            self.var.sum,
            self.var.avg,
            self.var.max,
            self.polysemy.avp,
            self.polysemy.avnp,
        ]
    }

    pub fn named(&self) -> impl Iterator<Item = (&'static str, f64)> {
        PRE_PREDICTORS.into_iter().zip(self.values())
    }
}
