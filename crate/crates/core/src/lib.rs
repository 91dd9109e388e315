//! Query performance prediction toolkit.
//!
//! Builds an in-memory inverted index over a document collection, retrieves
//! with a Dirichlet-smoothed query-likelihood model, computes pre- and
//! post-retrieval performance predictors, fuses them with penalized
//! regression and evaluates the predictions against average precision.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod harness;
pub mod postret;
pub mod preret;
pub mod retrieval;
pub mod seed;
pub mod tsv;

pub use error::{Error, Result};
