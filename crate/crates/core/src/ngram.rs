//! Token-level n-gram counts with stupid-backoff scoring.
//!
//! The model stores raw counts for every n-gram length up to its order and
//! answers two questions: how often was this n-gram seen, and how plausible
//! is it under stupid backoff. Backoff multiplies by a fixed alpha each
//! time the leftmost context word is dropped; the base case is the unigram
//! relative frequency. Scores are reported as log10, with negative
//! infinity standing in for "never seen even as a unigram".
//!
//! Both judgments feed the typo-vs-intended decision downstream: an n-gram
//! counts as valid only when its log-probability and its raw count both
//! clear their thresholds.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tokenizer::{tokenize, TokenizerConfig};

/// Thresholds deciding whether an n-gram counts as plausible language.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityThresholds {
    /// Minimum log10 probability, exclusive.
    pub logprob_min: f64,
    /// Minimum raw count, exclusive.
    pub count_min: u64,
    /// Stupid-backoff multiplier per dropped context word.
    pub backoff_alpha: f64,
}

impl Default for ValidityThresholds {
    fn default() -> Self {
        ValidityThresholds {
            logprob_min: -10.8,
            count_min: 0,
            backoff_alpha: 0.4,
        }
    }
}

/// Counts ingested from a pre-aggregated TSV, with per-row bookkeeping.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestStats {
    pub accepted_rows: usize,
    pub malformed_rows: usize,
    pub over_order_rows: usize,
}

/// An immutable n-gram count table of a fixed maximum order.
///
/// Keys are space-joined token tuples; tokens themselves never contain
/// whitespace, so the joined form is unambiguous.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NgramModel {
    order: usize,
    counts: HashMap<String, u64>,
    total_unigrams: u64,
}

impl NgramModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn total_unigrams(&self) -> u64 {
        self.total_unigrams
    }

    /// Number of distinct stored n-grams across all lengths.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// All stored n-grams with their counts, in arbitrary order.
    pub fn stored_ngrams(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(k, &v)| (k.as_str(), v))
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == 0 || len > self.order {
            return Err(Error::NgramLength {
                len,
                order: self.order,
            });
        }
        Ok(())
    }

    fn count_of(&self, ngram: &[&str]) -> u64 {
        self.counts.get(&ngram.join(" ")).copied().unwrap_or(0)
    }

    /// Stored count of an n-gram, 0 if absent.
    pub fn raw_count<S: AsRef<str>>(&self, ngram: &[S]) -> Result<u64> {
        self.check_len(ngram.len())?;
        let toks: Vec<&str> = ngram.iter().map(AsRef::as_ref).collect();
        Ok(self.count_of(&toks))
    }

    /// Stupid-backoff score of the last word given the preceding context,
    /// as log10. Returns negative infinity when the final word was never
    /// seen as a unigram.
    pub fn log_prob<S: AsRef<str>>(&self, ngram: &[S], alpha: f64) -> Result<f64> {
        self.check_len(ngram.len())?;
        let toks: Vec<&str> = ngram.iter().map(AsRef::as_ref).collect();
        Ok(self.backoff_score(&toks, alpha).log10())
    }

    // Linear-space score; the log is taken once at the end so the backoff
    // chain is a plain product.
    fn backoff_score(&self, ngram: &[&str], alpha: f64) -> f64 {
        if ngram.len() == 1 {
            let c = self.count_of(ngram);
            if c == 0 || self.total_unigrams == 0 {
                return 0.0;
            }
            return c as f64 / self.total_unigrams as f64;
        }
        let full = self.count_of(ngram);
        if full > 0 {
            let ctx = self.count_of(&ngram[..ngram.len() - 1]);
            if ctx > 0 {
                return full as f64 / ctx as f64;
            }
            // A full count without its prefix can only come from a
            // hand-ingested table; fall back rather than divide by zero.
        }
        alpha * self.backoff_score(&ngram[1..], alpha)
    }

    /// Whether the n-gram clears both validity thresholds.
    pub fn is_valid_ngram<S: AsRef<str>>(
        &self,
        ngram: &[S],
        thresholds: &ValidityThresholds,
    ) -> Result<bool> {
        Ok(self.log_prob(ngram, thresholds.backoff_alpha)? > thresholds.logprob_min
            && self.raw_count(ngram)? > thresholds.count_min)
    }

    /// Persist as sorted text: a header line, then one `<ngram>\t<count>`
    /// row per stored n-gram in lexicographic order.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut keys: Vec<&String> = self.counts.keys().collect();
        keys.sort_unstable();
        let mut out = format!(
            "ngram-model v1 order={} unigrams={}\n",
            self.order, self.total_unigrams
        );
        for key in keys {
            writeln!(out, "{}\t{}", key, self.counts[key]).expect("string write");
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Load a model persisted by [`NgramModel::save`], verifying that the
    /// header's unigram total matches the rows.
    pub fn load(path: &Path) -> Result<NgramModel> {
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = content.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "empty model file"))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let (order, unigrams) = match parts.as_slice() {
            ["ngram-model", "v1", order_kv, unigrams_kv] => {
                let order = order_kv
                    .strip_prefix("order=")
                    .and_then(|v| v.parse::<usize>().ok())
                    .ok_or_else(|| Error::parse(path, 1, format!("bad field {:?}", order_kv)))?;
                let unigrams = unigrams_kv
                    .strip_prefix("unigrams=")
                    .and_then(|v| v.parse::<u64>().ok())
                    .ok_or_else(|| {
                        Error::parse(path, 1, format!("bad field {:?}", unigrams_kv))
                    })?;
                (order, unigrams)
            }
            _ => return Err(Error::parse(path, 1, format!("bad header {:?}", header))),
        };
        if order == 0 {
            return Err(Error::InvalidOrder(0));
        }

        let mut counts: HashMap<String, u64> = HashMap::new();
        for (idx, line) in lines.enumerate() {
            let line_no = idx + 2;
            if line.is_empty() {
                continue;
            }
            let (ngram, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, line_no, "missing tab separator"))?;
            let count: u64 = count
                .parse()
                .map_err(|_| Error::parse(path, line_no, format!("bad count {:?}", count)))?;
            let token_count = ngram.split_whitespace().count();
            if token_count == 0 || token_count > order {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("n-gram length {} outside 1..={}", token_count, order),
                ));
            }
            *counts.entry(ngram.to_string()).or_insert(0) += count;
        }

        let total: u64 = counts
            .iter()
            .filter(|(k, _)| !k.contains(' '))
            .map(|(_, &v)| v)
            .sum();
        if total != unigrams {
            return Err(Error::parse(
                path,
                1,
                format!("header claims {} unigrams, rows sum to {}", unigrams, total),
            ));
        }
        if counts.is_empty() || total == 0 {
            return Err(Error::EmptyModel);
        }
        Ok(NgramModel {
            order,
            counts,
            total_unigrams: total,
        })
    }
}

/// Count every n-gram of length 1..=order in the given lines. N-grams
/// never cross line boundaries.
pub fn build_model_from_lines<I, S>(
    lines: I,
    order: usize,
    config: &TokenizerConfig,
) -> Result<NgramModel>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    if order == 0 {
        return Err(Error::InvalidOrder(order));
    }
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut total_unigrams = 0u64;
    for line in lines {
        let tokens = tokenize(line.as_ref(), config).tokens;
        total_unigrams += tokens.len() as u64;
        for n in 1..=order.min(tokens.len()) {
            for window in tokens.windows(n) {
                *counts.entry(window.join(" ")).or_insert(0) += 1;
            }
        }
    }
    if total_unigrams == 0 {
        return Err(Error::EmptyModel);
    }
    Ok(NgramModel {
        order,
        counts,
        total_unigrams,
    })
}

/// Build a model by counting n-grams over one or more corpus files.
pub fn build_model<P: AsRef<Path>>(
    corpus_paths: &[P],
    order: usize,
    config: &TokenizerConfig,
) -> Result<NgramModel> {
    if order == 0 {
        return Err(Error::InvalidOrder(order));
    }
    let mut all_lines: Vec<String> = Vec::new();
    for path in corpus_paths {
        let path = path.as_ref();
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        all_lines.extend(content.lines().map(str::to_string));
    }
    build_model_from_lines(all_lines.iter(), order, config)
}

/// Ingest pre-aggregated counts from TSV.
///
/// Two row shapes are accepted: `<ngram>\t<count>` and the per-year
/// `<ngram>\t<year>\t<match_count>\t<volume_count>`, whose match counts
/// are summed across years. Rows longer than the order are skipped, and
/// malformed rows are counted rather than fatal.
pub fn ingest_counts(path: &Path, order: usize) -> Result<(NgramModel, IngestStats)> {
    if order == 0 {
        return Err(Error::InvalidOrder(order));
    }
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut stats = IngestStats::default();
    for line in content.lines() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let (ngram_field, count) = match fields.as_slice() {
            [ngram, count] => match count.parse::<u64>() {
                Ok(c) => (*ngram, c),
                Err(_) => {
                    stats.malformed_rows += 1;
                    continue;
                }
            },
            [ngram, _year, match_count, _volumes] => match match_count.parse::<u64>() {
                Ok(c) => (*ngram, c),
                Err(_) => {
                    stats.malformed_rows += 1;
                    continue;
                }
            },
            _ => {
                stats.malformed_rows += 1;
                continue;
            }
        };
        let tokens: Vec<&str> = ngram_field.split_whitespace().collect();
        if tokens.is_empty() {
            stats.malformed_rows += 1;
            continue;
        }
        if tokens.len() > order {
            stats.over_order_rows += 1;
            continue;
        }
        *counts.entry(tokens.join(" ")).or_insert(0) += count;
        stats.accepted_rows += 1;
    }

    let total_unigrams: u64 = counts
        .iter()
        .filter(|(k, _)| !k.contains(' '))
        .map(|(_, &v)| v)
        .sum();
    if counts.is_empty() || total_unigrams == 0 {
        return Err(Error::EmptyModel);
    }
    Ok((
        NgramModel {
            order,
            counts,
            total_unigrams,
        },
        stats,
    ))
}
