//! Entity dictionary: one entity per line, IDF token weights, core tokens.
//!
//! Token weights come from the dictionary itself: idf(t) = ln(N / df(t)),
//! where df counts how many entities contain the token at least once. Rare
//! tokens weigh more, and the heaviest token of an entity is its "core"
//! token, the anchor the matcher searches around.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tokenizer::{tokenize, TokenizerConfig};

/// One dictionary entry with its normalized token weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Entity {
    pub id: usize,
    /// The raw dictionary line, used verbatim in match output.
    pub text: String,
    pub tokens: Vec<String>,
    /// Non-negative weights summing to 1, aligned with `tokens`.
    pub weights: Vec<f64>,
    /// Index of the heaviest token (leftmost on ties).
    pub core_index: usize,
    /// Sum of the tokens' raw IDF values, the denominator for deletion
    /// costs during matching.
    pub raw_idf_sum: f64,
}

/// Token → idf lookup shared by all entities.
#[derive(Debug, Clone, Default)]
pub struct IdfTable {
    map: HashMap<String, f64>,
    /// Largest stored idf; the raw weight assigned to unknown tokens.
    pub max_idf: f64,
}

impl IdfTable {
    /// The idf of a stored token, or `max_idf` for a token the dictionary
    /// has never seen (unseen means maximally rare).
    pub fn raw_weight(&self, token: &str) -> f64 {
        self.map.get(token).copied().unwrap_or(self.max_idf)
    }

    pub fn get(&self, token: &str) -> Option<f64> {
        self.map.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// The loaded dictionary: entities plus the IDF table they were weighted
/// with. Immutable once built.
#[derive(Debug, Clone)]
pub struct Dictionary {
    pub entities: Vec<Entity>,
    pub idf: IdfTable,
}

impl Dictionary {
    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    /// Build a dictionary from lines already in memory. Blank lines are
    /// skipped and duplicate lines collapse to a single entity; an input
    /// with nothing left after filtering is rejected.
    pub fn from_lines<I, S>(lines: I, config: &TokenizerConfig) -> Result<Dictionary>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seen = HashSet::new();
        let mut texts: Vec<String> = Vec::new();
        for line in lines {
            let line = line.as_ref();
            if line.trim().is_empty() {
                continue;
            }
            if seen.insert(line.to_string()) {
                texts.push(line.to_string());
            }
        }
        if texts.is_empty() {
            return Err(Error::EmptyDictionary);
        }

        let token_lists: Vec<Vec<String>> =
            texts.iter().map(|t| tokenize(t, config).tokens).collect();
        let idf = compute_idf(&token_lists);

        let entities = texts
            .into_iter()
            .zip(token_lists)
            .enumerate()
            .map(|(id, (text, tokens))| {
                let (weights, core_index) = entity_weights(&tokens, &idf);
                let raw_idf_sum = tokens.iter().map(|t| idf.raw_weight(t)).sum();
                Entity {
                    id,
                    text,
                    tokens,
                    weights,
                    core_index,
                    raw_idf_sum,
                }
            })
            .collect();

        Ok(Dictionary { entities, idf })
    }
}

/// Load a dictionary from a UTF-8 file with one entity per line.
pub fn load_dictionary(path: &Path, config: &TokenizerConfig) -> Result<Dictionary> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Dictionary::from_lines(content.lines(), config)
}

/// Compute idf(t) = ln(N / df(t)) over the given token lists, where df
/// counts each entity once no matter how often it repeats the token.
pub fn compute_idf(token_lists: &[Vec<String>]) -> IdfTable {
    let n = token_lists.len() as f64;
    let mut df: HashMap<String, usize> = HashMap::new();
    for tokens in token_lists {
        let distinct: HashSet<&String> = tokens.iter().collect();
        for token in distinct {
            *df.entry(token.clone()).or_insert(0) += 1;
        }
    }
    let map: HashMap<String, f64> = df
        .into_iter()
        .map(|(token, count)| (token, (n / count as f64).ln()))
        .collect();
    let max_idf = map.values().copied().fold(0.0, f64::max);
    IdfTable { map, max_idf }
}

/// Normalize raw idf values into weights and pick the core token.
///
/// When every raw weight is zero (a single-entity dictionary, say) the
/// weights fall back to uniform so they still sum to 1. Ties for the
/// maximum go to the leftmost token.
pub fn entity_weights(tokens: &[String], idf: &IdfTable) -> (Vec<f64>, usize) {
    let raw: Vec<f64> = tokens.iter().map(|t| idf.raw_weight(t)).collect();
    let sum: f64 = raw.iter().sum();
    let weights: Vec<f64> = if sum == 0.0 {
        vec![1.0 / tokens.len() as f64; tokens.len()]
    } else {
        raw.iter().map(|w| w / sum).collect()
    };
    let core_index = weights
        .iter()
        .enumerate()
        .max_by(|(ai, aw), (bi, bw)| aw.total_cmp(bw).then(bi.cmp(ai)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    (weights, core_index)
}
