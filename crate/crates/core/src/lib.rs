//! Dictionary-based approximate entity extraction.
//!
//! The pipeline finds dictionary entities in free text even when the
//! text spells them differently:
//!
//! 1. [`tokenizer`] splits text on whitespace, tracking byte offsets.
//! 2. [`dictionary`] loads entities and weights their tokens by rarity.
//! 3. [`matcher`] generates candidate windows anchored on each entity's
//!    rarest token and scores them with a two-level (token and
//!    character) weighted edit distance.
//! 4. [`postprocess`] reexamines approximate matches: an n-gram model
//!    ([`ngram`]) separates typos from intended words, and intended
//!    divergences are rescored from embedding cosine similarity
//!    ([`embeddings`]).
//! 5. [`eval`] measures the result against labelled data with
//!    precision/recall, histograms, and ROC/AUC.
//!
//! [`fixtures`] generates a seeded synthetic bundle that exercises the
//! whole pipeline with known ground truth.

pub mod dictionary;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod matcher;
pub mod ngram;
pub mod postprocess;
pub mod tokenizer;

pub use dictionary::{load_dictionary, Dictionary, Entity, IdfTable};
pub use embeddings::{load_embeddings, EmbeddingStore};
pub use error::{Error, Result};
pub use eval::{evaluate, EvalReport, Label, LabeledScore};
pub use matcher::{extract, ExtractConfig, MatchedPair, TokenSpan};
pub use ngram::{NgramModel, ValidityThresholds};
pub use postprocess::{postprocess, Decision, RescoreConfig, RescoredPair};
pub use tokenizer::{tokenize, TokenizerConfig, TokenSequence};
