//! Sentence-level language identification for English and the official
//! Indian languages.
//!
//! The pipeline runs raw text through [`textproc`] cleaning, builds labeled
//! [`corpus`] splits, turns sentences into sparse TF-IDF or hashed-subword
//! vectors with [`features`], trains any of the nine [`classifiers`],
//! combines them with [`ensemble`] voting and scores predictions with
//! [`eval`]. [`harvest`] covers page-text extraction and fetch throttling
//! over local HTML collections.

pub mod classifiers;
pub mod corpus;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod features;
pub mod harvest;
pub mod synth;
pub mod textproc;

pub use error::{Error, Result};

// The guide's snippets run as doctests so the book cannot drift from the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/text.md")]
    mod text {}
    #[doc = include_str!("../../../book/src/corpus.md")]
    mod corpus {}
    #[doc = include_str!("../../../book/src/features.md")]
    mod features {}
    #[doc = include_str!("../../../book/src/classifiers.md")]
    mod classifiers {}
    #[doc = include_str!("../../../book/src/ensembles.md")]
    mod ensembles {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/harvest.md")]
    mod harvest {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
