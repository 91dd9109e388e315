//! Train/test partitions of the query set.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;

use super::config::Protocol;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPair {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    pub protocol: Protocol,
    pub seed: u64,
    pub pairs: Vec<SplitPair>,
}

impl SplitPlan {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Errors unless every pair is an exact partition of `query_ids`.
    pub fn check_partitions(&self, query_ids: &[String]) -> Result<()> {
        let all: BTreeSet<&str> = query_ids.iter().map(String::as_str).collect();
        for (i, p) in self.pairs.iter().enumerate() {
            let train: BTreeSet<&str> = p.train.iter().map(String::as_str).collect();
            let test: BTreeSet<&str> = p.test.iter().map(String::as_str).collect();
            let exact = train.len() == p.train.len()
                && test.len() == p.test.len()
                && train.is_disjoint(&test)
                && train.union(&test).copied().collect::<BTreeSet<_>>() == all;
            if !exact {
                return Err(Error::invalid(format!("split {i} is not a partition of the query set")));
            }
        }
        Ok(())
    }

    /// `split<TAB>query_id<TAB>role` with one line per query per split.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("split\tquery_id\trole\n");
        for (i, p) in self.pairs.iter().enumerate() {
            for q in &p.train {
                let _ = writeln!(out, "{i}\t{q}\ttrain");
            }
            for q in &p.test {
                let _ = writeln!(out, "{i}\t{q}\ttest");
            }
        }
        out
    }
}

/// Keeps the caller's order within each side of the split.
fn pair_from_mask(query_ids: &[String], is_train: &[bool]) -> SplitPair {
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (q, &t) in query_ids.iter().zip(is_train) {
        if t {
            train.push(q.clone());
        } else {
            test.push(q.clone());
        }
    }
    SplitPair { train, test }
}

/// `repeats` seeded shuffles; the first ⌈n/2⌉ queries of each are the
/// training half. Repeat `r` draws from seed `(seed, "halves", r)`.
pub fn split_random_halves(query_ids: &[String], repeats: usize, seed: u64) -> Result<SplitPlan> {
    let n = query_ids.len();
    if n < 4 {
        return Err(Error::invalid(format!("random halves need at least 4 queries, got {n}")));
    }
    let pairs = (0..repeats)
        .map(|r| {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng_from_seed(derive_seed(seed, &["halves".into(), r.into()])));
            let mut mask = vec![false; n];
            for &i in &order[..n.div_ceil(2)] {
                mask[i] = true;
            }
            pair_from_mask(query_ids, &mask)
        })
        .collect();
    Ok(SplitPlan {
        protocol: Protocol::Halves,
        seed,
        pairs,
    })
}

pub fn split_leave_one_out(query_ids: &[String]) -> Result<SplitPlan> {
    let n = query_ids.len();
    if n < 2 {
        return Err(Error::invalid(format!("leave-one-out needs at least 2 queries, got {n}")));
    }
    let pairs = (0..n)
        .map(|i| {
            let mask: Vec<bool> = (0..n).map(|j| j != i).collect();
            pair_from_mask(query_ids, &mask)
        })
        .collect();
    Ok(SplitPlan {
        protocol: Protocol::LeaveOneOut,
        seed: 0,
        pairs,
    })
}

/// One split with the given training queries; the rest are test queries.
pub fn split_fixed(query_ids: &[String], train_ids: &[String]) -> Result<SplitPlan> {
    let known: BTreeSet<&str> = query_ids.iter().map(String::as_str).collect();
    if let Some(q) = train_ids.iter().find(|q| !known.contains(q.as_str())) {
        return Err(Error::invalid(format!("training query `{q}` is not in the query set")));
    }
    let train: BTreeSet<&str> = train_ids.iter().map(String::as_str).collect();
    let mask: Vec<bool> = query_ids.iter().map(|q| train.contains(q.as_str())).collect();
    let pair = pair_from_mask(query_ids, &mask);
    if pair.train.is_empty() || pair.test.is_empty() {
        return Err(Error::invalid("fixed split needs non-empty train and test sets"));
    }
    Ok(SplitPlan {
        protocol: Protocol::Fixed,
        seed: 0,
        pairs: vec![pair],
    })
}

/// Fixed split with a seeded uniform sample of `fraction·n` (rounded,
/// at least 2) training queries.
pub fn split_fixed_fraction(query_ids: &[String], fraction: f64, seed: u64) -> Result<SplitPlan> {
    let n = query_ids.len();
    let k = ((fraction * n as f64).round() as usize).max(2);
    if k >= n {
        return Err(Error::invalid(format!("a training sample of {k} leaves no test queries (n = {n})")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(derive_seed(seed, &["fixed".into()])));
    let train: Vec<String> = order[..k].iter().map(|&i| query_ids[i].clone()).collect();
    let mut plan = split_fixed(query_ids, &train)?;
    plan.seed = seed;
    Ok(plan)
}

/// Training ids, one per line (blank and `#` lines ignored).
pub fn parse_train_ids(text: &str) -> Vec<String> {
    crate::tsv::data_lines(text)
        .map(|(_, l)| l.split('\t').next().unwrap_or("").trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}
