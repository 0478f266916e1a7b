//! Semantic chart parsing guided by word-sense advice.
//!
//! A best-first chart parser assigns ontology types and semantic roles to a
//! sentence. Sense advice from an external disambiguator reaches the parser
//! in three ways: as extra score-1 lexical entries (prehinting), as a score
//! boost for matching constituents while parsing (progressive hinting), or by
//! restricting advised words to the advised senses (fixing). The [`eval`]
//! module scores each variant's sense decisions against gold annotations.
//!
//! Module map:
//!
//! - [`ontology`]: single-inheritance types, roles, Wu-Palmer, factorization
//! - [`sensemap`]: synset graph and its subsumption onto ontology types
//! - [`lexicon`]: lexical entries, generation, scoring, pruning
//! - [`parser`]: the chart parser and logical forms
//! - [`hinting`]: the three hinting strategies
//! - [`advice`]: corpus and advice files, token unification
//! - [`eval`]: variants, metrics, report

pub mod advice;
pub mod cli;
pub mod error;
pub mod eval;
pub mod hinting;
pub mod lexicon;
pub mod ontology;
pub mod parser;
pub mod sensemap;

pub use error::{Error, Result};
