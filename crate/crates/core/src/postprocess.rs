//! Second-pass scoring of approximate matches.
//!
//! The edit-distance score treats every character difference as noise, but
//! a one-letter divergence can be two very different things: a typo of the
//! entity's word, or a different word the author meant to write. This pass
//! tells them apart with the language model: a divergent token whose
//! surrounding n-grams agree with the entity's (both sides plausible, or
//! both sides implausible) is taken as intended, and the pair is rescored
//! from embedding cosine similarity instead of character distance. Typos
//! and everything else keep their original score, and trailing-period
//! artifacts are repaired outright.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::dictionary::Dictionary;
use crate::embeddings::EmbeddingStore;
use crate::error::{Error, Result};
use crate::matcher::{char_similarity, MatchRecord, MatchedPair};
use crate::ngram::{NgramModel, ValidityThresholds};
use crate::tokenizer::{strip_trailing_period, tokenize, TokenizerConfig};

/// Post-processing knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescoreConfig {
    /// Base of the exponential distance normalization; must exceed 1.
    pub base: f64,
    pub thresholds: ValidityThresholds,
    /// Repair pairs that differ only by trailing periods.
    pub strip_period_fix: bool,
    /// Character-level threshold, reused from extraction.
    pub tau: f64,
}

impl Default for RescoreConfig {
    fn default() -> Self {
        RescoreConfig {
            base: std::f64::consts::E,
            thresholds: ValidityThresholds::default(),
            strip_period_fix: true,
            tau: 0.8,
        }
    }
}

/// How a pair left the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    /// Score was already 1.
    ExactPassthrough,
    /// Identical after stripping trailing periods; forced to 1.
    PeriodFix,
    /// Every divergence looks like a typo; 2ED score kept.
    TypoKeep2ED,
    /// Rescored from embedding similarity.
    IntendedRescored,
    /// An intended word was missing from the embeddings; 2ED score kept.
    OovKeep2ED,
    /// Token-level edits or dissimilar tokens; 2ED score kept.
    StructuralKeep2ED,
}

impl Decision {
    pub const ALL: [Decision; 6] = [
        Decision::ExactPassthrough,
        Decision::PeriodFix,
        Decision::TypoKeep2ED,
        Decision::IntendedRescored,
        Decision::OovKeep2ED,
        Decision::StructuralKeep2ED,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Decision::ExactPassthrough => "ExactPassthrough",
            Decision::PeriodFix => "PeriodFix",
            Decision::TypoKeep2ED => "TypoKeep2ED",
            Decision::IntendedRescored => "IntendedRescored",
            Decision::OovKeep2ED => "OovKeep2ED",
            Decision::StructuralKeep2ED => "StructuralKeep2ED",
        }
    }
}

impl std::fmt::Display for Decision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Decision {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Decision, String> {
        Decision::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| format!("unknown decision {:?}", s))
    }
}

/// One rescored divergence: the position and token pair, plus the cosine
/// similarity and its normalized distance.
#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    pub position: usize,
    pub ts: String,
    pub te: String,
    pub cosine: f64,
    pub ed_norm: f64,
}

/// A matched pair after post-processing.
#[derive(Debug, Clone, PartialEq)]
pub struct RescoredPair {
    pub pair: MatchedPair,
    pub final_score: f64,
    pub decision: Decision,
    /// Filled only for [`Decision::IntendedRescored`]: the divergences
    /// whose normalized distances produced the final score.
    pub divergences: Vec<Divergence>,
}

/// Token classification of one divergent position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergenceClass {
    Intended,
    Typo,
}

/// Positionally compare two equal-length token lists.
///
/// Returns the differing positions as `(position, substring_token,
/// entity_token)`. Returns `None` (a structural mismatch) when the lists
/// have different lengths, or when any differing pair is less than `tau`
/// similar; either way the difference is not a pure character-level one.
pub fn locate_divergences<'a>(
    sub_tokens: &'a [String],
    ent_tokens: &'a [String],
    tau: f64,
) -> Option<Vec<(usize, &'a str, &'a str)>> {
    if sub_tokens.len() != ent_tokens.len() {
        return None;
    }
    let mut divergences = Vec::new();
    for (i, (ts, te)) in sub_tokens.iter().zip(ent_tokens).enumerate() {
        if ts == te {
            continue;
        }
        if char_similarity(ts, te) < tau {
            return None;
        }
        divergences.push((i, ts.as_str(), te.as_str()));
    }
    Some(divergences)
}

/// All length-`n` windows containing `position`. A list shorter than `n`
/// yields itself as the single window.
pub fn surrounding_ngrams(tokens: &[String], position: usize, n: usize) -> Vec<&[String]> {
    if tokens.len() < n {
        return vec![tokens];
    }
    let lo = position.saturating_sub(n - 1);
    let hi = position.min(tokens.len() - n);
    (lo..=hi).map(|start| &tokens[start..start + n]).collect()
}

/// Decide whether the divergence at `position` is an intended word or a
/// typo.
///
/// Windows of up to three tokens around the position are compared in
/// pairs, substring window against entity window at the same offsets. The
/// divergence is intended when some pair agrees on validity, both windows
/// valid or both invalid; if the substring disagrees with the entity in
/// every window, the token is judged a typo.
pub fn classify_typo(
    lm: &NgramModel,
    sub_tokens: &[String],
    ent_tokens: &[String],
    position: usize,
    thresholds: &ValidityThresholds,
) -> DivergenceClass {
    let n = lm.order().min(3);
    let sub_windows = surrounding_ngrams(sub_tokens, position, n);
    let ent_windows = surrounding_ngrams(ent_tokens, position, n);
    for (sw, ew) in sub_windows.iter().zip(&ent_windows) {
        // Window lengths are capped at min(3, order) and at the list
        // length, so they always fit the model.
        let sub_valid = lm
            .is_valid_ngram(sw, thresholds)
            .expect("window length fits model order");
        let ent_valid = lm
            .is_valid_ngram(ew, thresholds)
            .expect("window length fits model order");
        if sub_valid == ent_valid {
            return DivergenceClass::Intended;
        }
    }
    DivergenceClass::Typo
}

/// Turn a cosine similarity into a distance in [0,1] that punishes low
/// similarities exponentially: `(base^(1-cos) - 1) / (base - 1)`. The
/// cosine is clamped to [0,1] first, so the distance is 0 at cosine 1 and
/// exactly 1 at cosine 0 or below.
pub fn normalize_distance(cos: f64, base: f64) -> Result<f64> {
    if base <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "normalization base must exceed 1, got {}",
            base
        )));
    }
    let cos = cos.clamp(0.0, 1.0);
    Ok((base.powf(1.0 - cos) - 1.0) / (base - 1.0))
}

/// Final score from normalized distances: `1 - sum/entity_token_count`,
/// clamped into [0,1].
pub fn rescore(ed_norms: &[f64], entity_token_count: usize) -> f64 {
    let sum: f64 = ed_norms.iter().sum();
    (1.0 - sum / entity_token_count as f64).clamp(0.0, 1.0)
}

/// Run the full decision pipeline for one pair of token lists.
///
/// The caller must have validated `config.base` (see [`postprocess`]);
/// cosine lookups that fail fall back to the 2ED score rather than
/// erroring.
fn decide_pair(
    sub_tokens: &[String],
    ent_tokens: &[String],
    score_2ed: f64,
    lm: &NgramModel,
    embeddings: &EmbeddingStore,
    config: &RescoreConfig,
) -> (f64, Decision, Vec<Divergence>) {
    if score_2ed == 1.0 {
        return (score_2ed, Decision::ExactPassthrough, Vec::new());
    }

    if config.strip_period_fix
        && sub_tokens.len() == ent_tokens.len()
        && sub_tokens
            .iter()
            .zip(ent_tokens)
            .all(|(ts, te)| strip_trailing_period(ts) == te)
    {
        return (1.0, Decision::PeriodFix, Vec::new());
    }

    let located = match locate_divergences(sub_tokens, ent_tokens, config.tau) {
        None => return (score_2ed, Decision::StructuralKeep2ED, Vec::new()),
        Some(d) => d,
    };
    if located.is_empty() {
        // Identical token lists; can happen when a score was rounded on
        // its way through a file.
        return (score_2ed, Decision::ExactPassthrough, Vec::new());
    }

    let intended: Vec<(usize, &str, &str)> = located
        .into_iter()
        .filter(|&(position, _, _)| {
            classify_typo(lm, sub_tokens, ent_tokens, position, &config.thresholds)
                == DivergenceClass::Intended
        })
        .collect();
    if intended.is_empty() {
        return (score_2ed, Decision::TypoKeep2ED, Vec::new());
    }

    let mut divergences = Vec::with_capacity(intended.len());
    for (position, ts, te) in intended {
        let cosine = match embeddings.cosine(ts, te) {
            Ok(c) => c,
            Err(_) => return (score_2ed, Decision::OovKeep2ED, Vec::new()),
        };
        let ed_norm = normalize_distance(cosine, config.base)
            .expect("base validated before the pipeline ran");
        divergences.push(Divergence {
            position,
            ts: ts.to_string(),
            te: te.to_string(),
            cosine,
            ed_norm,
        });
    }
    let ed_norms: Vec<f64> = divergences.iter().map(|d| d.ed_norm).collect();
    let final_score = rescore(&ed_norms, ent_tokens.len());
    (final_score, Decision::IntendedRescored, divergences)
}

/// Post-process matched pairs against their dictionary entities. Output
/// order follows input order.
pub fn postprocess(
    matches: &[MatchedPair],
    dictionary: &Dictionary,
    lm: &NgramModel,
    embeddings: &EmbeddingStore,
    config: &RescoreConfig,
) -> Result<Vec<RescoredPair>> {
    normalize_distance(1.0, config.base)?;
    let mut out = Vec::with_capacity(matches.len());
    for pair in matches {
        let entity = dictionary.entities.get(pair.entity_id).ok_or_else(|| {
            Error::InvalidParameter(format!("unknown entity id {}", pair.entity_id))
        })?;
        let (final_score, decision, divergences) = decide_pair(
            &pair.substring_tokens,
            &entity.tokens,
            pair.score_2ed,
            lm,
            embeddings,
            config,
        );
        out.push(RescoredPair {
            pair: pair.clone(),
            final_score,
            decision,
            divergences,
        });
    }
    Ok(out)
}

/// Column names of the rescored TSV: the matcher columns plus the
/// post-processing outcome.
pub const RESCORED_TSV_HEADER: &str =
    "doc_id\tspan_start\tspan_end\tsubstring\tentity_id\tentity_text\tscore_2ed\tfinal_score\tdecision\tdivergences";

/// A matcher TSV row plus its post-processing outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct RescoredRecord {
    pub record: MatchRecord,
    pub final_score: f64,
    pub decision: Decision,
    pub divergences: Vec<Divergence>,
}

impl RescoredRecord {
    pub fn to_tsv_line(&self) -> String {
        let divergences = self
            .divergences
            .iter()
            .map(|d| {
                format!(
                    "{}:{}:{}:{:.6}:{:.6}",
                    d.position, d.ts, d.te, d.cosine, d.ed_norm
                )
            })
            .collect::<Vec<_>>()
            .join(";");
        format!(
            "{}\t{:.6}\t{}\t{}",
            self.record.to_tsv_line(),
            self.final_score,
            self.decision,
            divergences
        )
    }

    pub fn parse_tsv_line(line: &str) -> std::result::Result<RescoredRecord, String> {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 10 {
            return Err(format!(
                "expected 10 tab-separated fields, got {}",
                fields.len()
            ));
        }
        let record = MatchRecord::parse_tsv_line(&fields[..7].join("\t"))?;
        let final_score: f64 = fields[7]
            .parse()
            .map_err(|_| format!("bad final_score {:?}", fields[7]))?;
        let decision: Decision = fields[8].parse()?;
        let mut divergences = Vec::new();
        if !fields[9].is_empty() {
            for part in fields[9].split(';') {
                let bits: Vec<&str> = part.split(':').collect();
                if bits.len() != 5 {
                    return Err(format!("bad divergence field {:?}", part));
                }
                divergences.push(Divergence {
                    position: bits[0]
                        .parse()
                        .map_err(|_| format!("bad divergence position {:?}", bits[0]))?,
                    ts: bits[1].to_string(),
                    te: bits[2].to_string(),
                    cosine: bits[3]
                        .parse()
                        .map_err(|_| format!("bad divergence cosine {:?}", bits[3]))?,
                    ed_norm: bits[4]
                        .parse()
                        .map_err(|_| format!("bad divergence distance {:?}", bits[4]))?,
                });
            }
        }
        Ok(RescoredRecord {
            record,
            final_score,
            decision,
            divergences,
        })
    }
}

/// Post-process matcher TSV records. Entity tokens are recovered by
/// tokenizing the entity text column; substring tokens by splitting the
/// substring column on spaces.
pub fn postprocess_records(
    records: &[MatchRecord],
    lm: &NgramModel,
    embeddings: &EmbeddingStore,
    config: &RescoreConfig,
    tokenizer: &TokenizerConfig,
) -> Result<Vec<RescoredRecord>> {
    normalize_distance(1.0, config.base)?;
    let mut out = Vec::with_capacity(records.len());
    for record in records {
        let sub_tokens: Vec<String> = record
            .substring
            .split_whitespace()
            .map(str::to_string)
            .collect();
        let ent_tokens = tokenize(&record.entity_text, tokenizer).tokens;
        if sub_tokens.is_empty() || ent_tokens.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "record for doc {:?} has an empty substring or entity",
                record.doc_id
            )));
        }
        let (final_score, decision, divergences) = decide_pair(
            &sub_tokens,
            &ent_tokens,
            record.score_2ed,
            lm,
            embeddings,
            config,
        );
        out.push(RescoredRecord {
            record: record.clone(),
            final_score,
            decision,
            divergences,
        });
    }
    Ok(out)
}

/// Read rescored TSV rows, skipping a leading header line.
pub fn read_rescored_records(path: &Path) -> Result<Vec<RescoredRecord>> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        if line.is_empty() || (idx == 0 && line.starts_with("doc_id\t")) {
            continue;
        }
        let record =
            RescoredRecord::parse_tsv_line(line).map_err(|msg| Error::parse(path, idx + 1, msg))?;
        records.push(record);
    }
    Ok(records)
}

/// Write rescored TSV rows, header line first.
pub fn write_rescored_records(path: &Path, records: &[RescoredRecord]) -> Result<()> {
    let mut out = String::from(RESCORED_TSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.to_tsv_line());
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcher::TokenSpan;
    use crate::ngram::build_model_from_lines;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn lm(lines: &[&str]) -> NgramModel {
        build_model_from_lines(lines.iter().copied(), 3, &TokenizerConfig::default()).unwrap()
    }

    fn emb(entries: &[(&str, &[f64])]) -> EmbeddingStore {
        EmbeddingStore::from_vectors(
            entries[0].1.len(),
            entries.iter().map(|(w, v)| (*w, v.to_vec())),
        )
        .unwrap()
    }

    fn pair(sub: &str, entity_id: usize, score: f64) -> MatchedPair {
        let substring_tokens = toks(sub);
        MatchedPair {
            doc_id: "d".into(),
            span: TokenSpan {
                start: 0,
                end: substring_tokens.len(),
            },
            substring_tokens,
            entity_id,
            score_2ed: score,
        }
    }

    fn run_one(
        sub: &str,
        ent: &str,
        score: f64,
        lm: &NgramModel,
        emb: &EmbeddingStore,
        config: &RescoreConfig,
    ) -> (f64, Decision, Vec<Divergence>) {
        decide_pair(&toks(sub), &toks(ent), score, lm, emb, config)
    }

    #[test]
    fn divergences_found_positionally() {
        let sub = toks("code of honor");
        let ent = toks("code of honour");
        let d = locate_divergences(&sub, &ent, 0.8);
        assert_eq!(d, Some(vec![(2, "honor", "honour")]));
        assert_eq!(
            locate_divergences(&toks("a b"), &toks("a b"), 0.8),
            Some(vec![])
        );
    }

    #[test]
    fn length_mismatch_is_structural() {
        assert_eq!(locate_divergences(&toks("a b"), &toks("a b c"), 0.8), None);
    }

    #[test]
    fn dissimilar_divergence_is_structural() {
        // "ab" vs "xy": similarity 0, nowhere near tau.
        assert_eq!(
            locate_divergences(&toks("ab cdefg"), &toks("xy cdefg"), 0.8),
            None
        );
    }

    #[test]
    fn window_enumeration_matches_position() {
        let t = toks("a b c d");
        let windows = surrounding_ngrams(&t, 1, 3);
        assert_eq!(windows, vec![&t[0..3], &t[1..4]]);

        let t3 = toks("code of honor");
        assert_eq!(surrounding_ngrams(&t3, 2, 3), vec![&t3[..]]);

        let t2 = toks("a b");
        assert_eq!(surrounding_ngrams(&t2, 0, 3), vec![&t2[..]]);
    }

    #[test]
    fn both_windows_valid_means_intended() {
        let m = lm(&["code of honor", "code of honour"]);
        let class = classify_typo(
            &m,
            &toks("code of honor"),
            &toks("code of honour"),
            2,
            &ValidityThresholds::default(),
        );
        assert_eq!(class, DivergenceClass::Intended);
    }

    #[test]
    fn one_sided_validity_means_typo() {
        let m = lm(&["code of honour"]);
        let class = classify_typo(
            &m,
            &toks("code of honqr"),
            &toks("code of honour"),
            2,
            &ValidityThresholds::default(),
        );
        assert_eq!(class, DivergenceClass::Typo);
    }

    #[test]
    fn mutually_unseen_windows_mean_intended() {
        // The model knows a disjoint corpus; both windows are invalid,
        // which still counts as agreement.
        let m = lm(&["x y z"]);
        let class = classify_typo(
            &m,
            &toks("aa bb cc"),
            &toks("aa bb cd"),
            2,
            &ValidityThresholds::default(),
        );
        assert_eq!(class, DivergenceClass::Intended);
    }

    #[test]
    fn distance_normalization_endpoints_and_midpoint() {
        for base in [1.5, std::f64::consts::E, 10.0] {
            assert!(normalize_distance(1.0, base).unwrap().abs() < 1e-12);
            assert!((normalize_distance(0.0, base).unwrap() - 1.0).abs() < 1e-12);
            assert!((normalize_distance(-0.7, base).unwrap() - 1.0).abs() < 1e-12);
        }
        let e = std::f64::consts::E;
        let mid = normalize_distance(0.5, e).unwrap();
        assert!((mid - (e.sqrt() - 1.0) / (e - 1.0)).abs() < 1e-12);
        assert!((mid - 0.3775).abs() < 1e-4);
        assert!(normalize_distance(0.5, 1.0).is_err());
        assert!(normalize_distance(0.5, 0.3).is_err());
    }

    #[test]
    fn rescore_examples() {
        assert_eq!(rescore(&[0.0], 3), 1.0);
        let e = std::f64::consts::E;
        let ed = normalize_distance(0.637478, e).unwrap();
        let score = rescore(&[ed], 3);
        assert!((score - 0.9152).abs() < 1e-3);
        assert_eq!(rescore(&[1.0, 1.0, 1.0, 1.0], 2), 0.0);
    }

    #[test]
    fn exact_pairs_pass_through() {
        let m = lm(&["code of honour"]);
        let e = emb(&[("honour", &[1.0, 0.0])]);
        let (score, decision, div) = run_one(
            "code of honour",
            "code of honour",
            1.0,
            &m,
            &e,
            &RescoreConfig::default(),
        );
        assert_eq!(score, 1.0);
        assert_eq!(decision, Decision::ExactPassthrough);
        assert!(div.is_empty());
    }

    #[test]
    fn trailing_period_repaired_when_enabled() {
        let m = lm(&["code of honour"]);
        let e = emb(&[("honour", &[1.0, 0.0])]);
        let config = RescoreConfig::default();
        let (score, decision, _) =
            run_one("code of honour.", "code of honour", 0.93, &m, &e, &config);
        assert_eq!(score, 1.0);
        assert_eq!(decision, Decision::PeriodFix);

        // With the fix off, "honour." counts as an ordinary divergence and
        // the unseen form classifies as a typo.
        let config_off = RescoreConfig {
            strip_period_fix: false,
            ..config
        };
        let (score, decision, _) =
            run_one("code of honour.", "code of honour", 0.93, &m, &e, &config_off);
        assert_eq!(score, 0.93);
        assert_eq!(decision, Decision::TypoKeep2ED);
    }

    #[test]
    fn token_count_difference_keeps_score() {
        let m = lm(&["code of honour"]);
        let e = emb(&[("honour", &[1.0, 0.0])]);
        let (score, decision, _) = run_one(
            "code honour",
            "code of honour",
            0.85,
            &m,
            &e,
            &RescoreConfig::default(),
        );
        assert_eq!(score, 0.85);
        assert_eq!(decision, Decision::StructuralKeep2ED);
    }

    #[test]
    fn typo_keeps_score() {
        let m = lm(&["code of honour"]);
        let e = emb(&[("honour", &[1.0, 0.0]), ("honqur", &[0.0, 1.0])]);
        let (score, decision, _) = run_one(
            "code of honqur",
            "code of honour",
            0.9444,
            &m,
            &e,
            &RescoreConfig::default(),
        );
        assert_eq!(score, 0.9444);
        assert_eq!(decision, Decision::TypoKeep2ED);
    }

    #[test]
    fn intended_divergence_rescored_from_cosine() {
        let m = lm(&["code of honor", "code of honour"]);
        // cos(honor, honour) = 0.8 by construction.
        let e = emb(&[("honor", &[1.0, 0.0]), ("honour", &[0.8, 0.6])]);
        let config = RescoreConfig::default();
        let (score, decision, div) =
            run_one("code of honor", "code of honour", 0.9444, &m, &e, &config);
        assert_eq!(decision, Decision::IntendedRescored);
        assert_eq!(div.len(), 1);
        assert_eq!(div[0].position, 2);
        assert_eq!(div[0].ts, "honor");
        assert_eq!(div[0].te, "honour");
        assert!((div[0].cosine - 0.8).abs() < 1e-12);
        let expected = 1.0 - normalize_distance(div[0].cosine, config.base).unwrap() / 3.0;
        assert!((score - expected).abs() < 1e-12);
    }

    #[test]
    fn oov_intended_word_keeps_score() {
        let m = lm(&["code of honor", "code of honour"]);
        let e = emb(&[("honour", &[1.0, 0.0])]);
        let (score, decision, div) = run_one(
            "code of honor",
            "code of honour",
            0.9444,
            &m,
            &e,
            &RescoreConfig::default(),
        );
        assert_eq!(score, 0.9444);
        assert_eq!(decision, Decision::OovKeep2ED);
        assert!(div.is_empty());
    }

    #[test]
    fn zero_vector_keeps_score_like_oov() {
        let m = lm(&["code of honor", "code of honour"]);
        let e = emb(&[("honor", &[0.0, 0.0]), ("honour", &[1.0, 0.0])]);
        let (_, decision, _) = run_one(
            "code of honor",
            "code of honour",
            0.9444,
            &m,
            &e,
            &RescoreConfig::default(),
        );
        assert_eq!(decision, Decision::OovKeep2ED);
    }

    #[test]
    fn mixed_divergences_rescore_only_the_intended_ones() {
        // Position 0 agrees in the model (both window forms seen), the
        // last position disagrees (entity form seen, substring form not),
        // so only position 0 contributes to the rescore. The typo token
        // is absent from the embeddings and must not trigger OOV.
        let m = lm(&[
            "ppppq qqqqq rrrrr",
            "ppppp qqqqq rrrrr",
            "qqqqq rrrrr sssss",
        ]);
        let e = emb(&[("ppppq", &[1.0, 0.0]), ("ppppp", &[0.6, 0.8])]);
        let config = RescoreConfig::default();
        let (score, decision, div) = run_one(
            "ppppq qqqqq rrrrr ssssq",
            "ppppp qqqqq rrrrr sssss",
            0.9,
            &m,
            &e,
            &config,
        );
        assert_eq!(decision, Decision::IntendedRescored);
        assert_eq!(div.len(), 1);
        assert_eq!(div[0].position, 0);
        let expected = 1.0 - normalize_distance(0.6, config.base).unwrap() / 4.0;
        assert!((score - expected).abs() < 1e-12);
    }

    #[test]
    fn postprocess_checks_base_and_entity_ids() {
        let dict = Dictionary::from_lines(["code of honour"], &TokenizerConfig::default()).unwrap();
        let m = lm(&["code of honour"]);
        let e = emb(&[("honour", &[1.0, 0.0])]);
        let bad_base = RescoreConfig {
            base: 1.0,
            ..RescoreConfig::default()
        };
        assert!(postprocess(&[], &dict, &m, &e, &bad_base).is_err());

        let stray = pair("code of honour", 7, 1.0);
        assert!(postprocess(&[stray], &dict, &m, &e, &RescoreConfig::default()).is_err());
    }

    #[test]
    fn postprocess_preserves_input_order() {
        let dict = Dictionary::from_lines(
            ["code of honour", "west bank"],
            &TokenizerConfig::default(),
        )
        .unwrap();
        let m = lm(&["code of honour", "west bank"]);
        let e = emb(&[("honour", &[1.0, 0.0])]);
        let pairs = vec![pair("west bank", 1, 1.0), pair("code of honour", 0, 1.0)];
        let out = postprocess(&pairs, &dict, &m, &e, &RescoreConfig::default()).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].pair.entity_id, 1);
        assert_eq!(out[1].pair.entity_id, 0);
    }

    #[test]
    fn decision_names_roundtrip() {
        for d in Decision::ALL {
            assert_eq!(d.as_str().parse::<Decision>().unwrap(), d);
        }
        assert!("NotADecision".parse::<Decision>().is_err());
    }

    #[test]
    fn rescored_record_roundtrips_through_tsv() {
        let record = MatchRecord {
            doc_id: "2".into(),
            span_start: 1,
            span_end: 4,
            substring: "code of honor".into(),
            entity_id: 0,
            entity_text: "code of honour".into(),
            score_2ed: 0.944444,
        };
        let rescored = RescoredRecord {
            record,
            final_score: 0.915235,
            decision: Decision::IntendedRescored,
            divergences: vec![Divergence {
                position: 2,
                ts: "honor".into(),
                te: "honour".into(),
                cosine: 0.637478,
                ed_norm: 0.254295,
            }],
        };
        let parsed = RescoredRecord::parse_tsv_line(&rescored.to_tsv_line()).unwrap();
        assert_eq!(parsed, rescored);

        let plain = RescoredRecord {
            divergences: Vec::new(),
            decision: Decision::ExactPassthrough,
            ..rescored
        };
        let line = plain.to_tsv_line();
        assert!(line.ends_with('\t'));
        assert_eq!(RescoredRecord::parse_tsv_line(&line).unwrap(), plain);
    }

    #[test]
    fn rescored_file_roundtrips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rescored.tsv");
        let rows = vec![RescoredRecord {
            record: MatchRecord {
                doc_id: "1".into(),
                span_start: 0,
                span_end: 2,
                substring: "west bank".into(),
                entity_id: 1,
                entity_text: "west bank".into(),
                score_2ed: 1.0,
            },
            final_score: 1.0,
            decision: Decision::ExactPassthrough,
            divergences: Vec::new(),
        }];
        write_rescored_records(&path, &rows).unwrap();
        assert_eq!(read_rescored_records(&path).unwrap(), rows);
    }

    proptest! {
        #[test]
        fn final_scores_stay_in_unit_range_and_keep_decisions_keep_scores(
            sub in prop::collection::vec("[ab]{4,6}", 1..4),
            ent in prop::collection::vec("[ab]{4,6}", 1..4),
            corpus in prop::collection::vec("[ab]{4,6}( [ab]{4,6}){0,3}", 1..5),
            score in 0.0f64..1.0,
        ) {
            let m = build_model_from_lines(
                corpus.iter().map(String::as_str),
                3,
                &TokenizerConfig::default(),
            );
            prop_assume!(m.is_ok());
            let m = m.unwrap();
            let e = emb(&[("aaaa", &[1.0, 0.0]), ("abab", &[0.5, 0.5])]);
            let (final_score, decision, _) = decide_pair(
                &sub,
                &ent,
                score,
                &m,
                &e,
                &RescoreConfig::default(),
            );
            prop_assert!((0.0..=1.0).contains(&final_score));
            match decision {
                Decision::TypoKeep2ED
                | Decision::OovKeep2ED
                | Decision::StructuralKeep2ED
                | Decision::ExactPassthrough => prop_assert_eq!(final_score, score),
                Decision::PeriodFix => prop_assert_eq!(final_score, 1.0),
                Decision::IntendedRescored => {}
            }
        }

        #[test]
        fn rescore_is_monotone_in_cosine(c1 in 0.0f64..1.0, c2 in 0.0f64..1.0) {
            prop_assume!(c1 < c2);
            let e = std::f64::consts::E;
            let d1 = normalize_distance(c1, e).unwrap();
            let d2 = normalize_distance(c2, e).unwrap();
            prop_assert!(d1 > d2);
            prop_assert!(rescore(&[d1], 3) < rescore(&[d2], 3));
        }
    }
}
