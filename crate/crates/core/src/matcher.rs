//! Candidate generation and two-level edit-distance scoring.
//!
//! Matching works at two granularities. At the token level a weighted edit
//! distance aligns a document substring against an entity: inserting a
//! missing entity token costs that token's weight, deleting a spurious
//! substring token costs its idf share, and substituting one token for
//! another is allowed only when the two are close enough at the character
//! level. Character closeness is plain Levenshtein distance normalized by
//! the longer token. The final score is `1 - total_cost`, clamped at 0, so
//! 1 means an exact match.
//!
//! Candidate substrings are not enumerated exhaustively. Each entity has a
//! core (heaviest) token; only windows around approximate occurrences of
//! that core token are considered, and windows provably unable to reach the
//! score threshold are pruned before scoring.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::dictionary::{Dictionary, Entity, IdfTable};
use crate::error::{Error, Result};
use crate::tokenizer::TokenSequence;

/// Extraction thresholds and window sizing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractConfig {
    /// Token-level score threshold; pairs scoring below it are dropped.
    pub delta: f64,
    /// Character-level similarity threshold gating substitutions.
    pub tau: f64,
    /// Extra tokens a candidate window may have beyond the entity length.
    pub max_span_slack: usize,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            delta: 0.8,
            tau: 0.8,
            max_span_slack: 2,
        }
    }
}

/// Half-open token index range `[start, end)` into a document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TokenSpan {
    pub start: usize,
    pub end: usize,
}

impl TokenSpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    pub fn overlaps(&self, other: &TokenSpan) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// The optimal alignment found by the scorer.
///
/// Indices refer to token positions: `deletions` into the substring,
/// `insertions` into the entity, `substitutions` pairs of both plus the
/// character similarity that was paid for. Aligned identical tokens are not
/// recorded, so an exact match has an empty script.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EditScript {
    pub deletions: Vec<usize>,
    pub insertions: Vec<usize>,
    pub substitutions: Vec<(usize, usize, f64)>,
    pub total_cost: f64,
}

impl EditScript {
    pub fn is_empty(&self) -> bool {
        self.deletions.is_empty() && self.insertions.is_empty() && self.substitutions.is_empty()
    }
}

/// One substring/entity pairing above the score threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPair {
    pub doc_id: String,
    pub span: TokenSpan,
    pub substring_tokens: Vec<String>,
    pub entity_id: usize,
    pub score_2ed: f64,
}

/// Candidate windows split into the ones worth scoring and the ones the
/// lower-bound filter discarded. The pruned list exists so tests can verify
/// the filter never discards a viable window.
#[derive(Debug, Clone, Default)]
pub struct CandidateSet {
    pub kept: Vec<TokenSpan>,
    pub pruned: Vec<TokenSpan>,
}

/// Standard Levenshtein distance over characters, unit costs.
pub fn char_edit_distance(a: &str, b: &str) -> usize {
    if a == b {
        return 0;
    }
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Character-level similarity in [0,1]: edit distance normalized by the
/// longer string. Equals 1 exactly when the strings are equal.
pub fn char_similarity(a: &str, b: &str) -> f64 {
    if a == b {
        return 1.0;
    }
    let max_len = a.chars().count().max(b.chars().count());
    1.0 - char_edit_distance(a, b) as f64 / max_len as f64
}

const OP_NONE: u8 = 0;
const OP_SUBST: u8 = 1;
const OP_DELETE: u8 = 2;
const OP_INSERT: u8 = 3;

/// Score a substring against an entity with the two-level weighted edit
/// distance; also returns the optimal edit script.
///
/// Deleting a substring token costs its raw idf (unknown tokens count as
/// maximally rare) divided by the entity's raw idf sum; when that sum is
/// zero the cost falls back to a uniform `1/len`. Inserting an entity token
/// costs its normalized weight. Substitution requires character similarity
/// of at least `tau` and costs `weight * (1 - similarity)`, which makes
/// identical tokens free. Ties prefer substitution, then deletion.
pub fn two_level_score(
    substring_tokens: &[String],
    entity: &Entity,
    idf: &IdfTable,
    tau: f64,
) -> (f64, EditScript) {
    let m = substring_tokens.len();
    let n = entity.tokens.len();
    let delete_cost = |s: &str| -> f64 {
        if entity.raw_idf_sum == 0.0 {
            1.0 / n as f64
        } else {
            idf.raw_weight(s) / entity.raw_idf_sum
        }
    };

    let mut cost = vec![vec![0.0f64; n + 1]; m + 1];
    let mut op = vec![vec![OP_NONE; n + 1]; m + 1];
    let mut sim_at = vec![vec![0.0f64; n + 1]; m + 1];

    for j in 1..=n {
        cost[0][j] = cost[0][j - 1] + entity.weights[j - 1];
        op[0][j] = OP_INSERT;
    }
    for i in 1..=m {
        cost[i][0] = cost[i - 1][0] + delete_cost(&substring_tokens[i - 1]);
        op[i][0] = OP_DELETE;
    }
    for i in 1..=m {
        for j in 1..=n {
            let s = &substring_tokens[i - 1];
            let e = &entity.tokens[j - 1];
            let mut best = f64::INFINITY;
            let mut chosen = OP_NONE;
            let mut chosen_sim = 0.0;
            let sim = char_similarity(s, e);
            if s == e || sim >= tau {
                let c = cost[i - 1][j - 1] + entity.weights[j - 1] * (1.0 - sim);
                if c < best {
                    best = c;
                    chosen = OP_SUBST;
                    chosen_sim = sim;
                }
            }
            let c = cost[i - 1][j] + delete_cost(s);
            if c < best {
                best = c;
                chosen = OP_DELETE;
            }
            let c = cost[i][j - 1] + entity.weights[j - 1];
            if c < best {
                best = c;
                chosen = OP_INSERT;
            }
            cost[i][j] = best;
            op[i][j] = chosen;
            sim_at[i][j] = chosen_sim;
        }
    }

    let mut deletions = Vec::new();
    let mut insertions = Vec::new();
    let mut substitutions = Vec::new();
    let (mut i, mut j) = (m, n);
    while i > 0 || j > 0 {
        match op[i][j] {
            OP_SUBST => {
                i -= 1;
                j -= 1;
                if substring_tokens[i] != entity.tokens[j] {
                    substitutions.push((i, j, sim_at[i + 1][j + 1]));
                }
            }
            OP_DELETE => {
                i -= 1;
                deletions.push(i);
            }
            OP_INSERT => {
                j -= 1;
                insertions.push(j);
            }
            _ => unreachable!("backtrace reached an unfilled cell"),
        }
    }
    deletions.reverse();
    insertions.reverse();
    substitutions.reverse();

    let total_cost = cost[m][n];
    let score = (1.0 - total_cost).max(0.0);
    (
        score,
        EditScript {
            deletions,
            insertions,
            substitutions,
            total_cost,
        },
    )
}

/// Total weight of entity tokens with no `tau`-approximate counterpart in
/// the window. Each such token can only be inserted at its full weight, so
/// this is a lower bound on the window's total cost.
pub fn uncovered_entity_weight(window: &[String], entity: &Entity, tau: f64) -> f64 {
    entity
        .tokens
        .iter()
        .zip(&entity.weights)
        .filter(|(e, _)| {
            !window
                .iter()
                .any(|t| t == *e || char_similarity(t, e) >= tau)
        })
        .map(|(_, w)| w)
        .sum()
}

/// All candidate windows for one entity, pruned and kept alike.
///
/// Anchors are document positions whose token is within `tau` of the
/// entity's core token. Every window containing an anchor with length up to
/// `len(entity) + max_span_slack` is a candidate; a window is pruned when
/// its uncovered entity weight exceeds `1 - delta`, since that alone
/// already pushes the score below `delta`.
pub fn generate_candidates_detailed(
    doc: &TokenSequence,
    entity: &Entity,
    config: &ExtractConfig,
) -> CandidateSet {
    let core = &entity.tokens[entity.core_index];
    let doc_tokens = &doc.tokens;
    let max_len = entity.tokens.len() + config.max_span_slack;

    let mut spans = BTreeSet::new();
    for (p, token) in doc_tokens.iter().enumerate() {
        if !(token == core || char_similarity(token, core) >= config.tau) {
            continue;
        }
        for i in p.saturating_sub(max_len - 1)..=p {
            for j in (p + 1)..=doc_tokens.len().min(i + max_len) {
                spans.insert(TokenSpan { start: i, end: j });
            }
        }
    }

    let mut set = CandidateSet::default();
    for span in spans {
        let window = &doc_tokens[span.start..span.end];
        if uncovered_entity_weight(window, entity, config.tau) > 1.0 - config.delta {
            set.pruned.push(span);
        } else {
            set.kept.push(span);
        }
    }
    set
}

/// The windows actually worth scoring for one entity.
pub fn generate_candidates(
    doc: &TokenSequence,
    entity: &Entity,
    config: &ExtractConfig,
) -> Vec<TokenSpan> {
    generate_candidates_detailed(doc, entity, config).kept
}

/// Match every dictionary entity against one document.
///
/// Scores each candidate window, keeps pairs at or above `delta`, and
/// resolves overlapping windows of the same entity in favor of the highest
/// score (ties: shorter, then leftmost). Results are ordered by position,
/// then entity id.
pub fn extract(
    doc_id: &str,
    doc: &TokenSequence,
    dictionary: &Dictionary,
    config: &ExtractConfig,
) -> Vec<MatchedPair> {
    let mut results = Vec::new();
    for entity in &dictionary.entities {
        let mut scored: Vec<(TokenSpan, f64)> = Vec::new();
        for span in generate_candidates(doc, entity, config) {
            let tokens = &doc.tokens[span.start..span.end];
            let (score, _) = two_level_score(tokens, entity, &dictionary.idf, config.tau);
            if score >= config.delta {
                scored.push((span, score));
            }
        }
        scored.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then(a.0.len().cmp(&b.0.len()))
                .then(a.0.start.cmp(&b.0.start))
        });
        let mut kept: Vec<(TokenSpan, f64)> = Vec::new();
        for (span, score) in scored {
            if kept.iter().all(|(s, _)| !s.overlaps(&span)) {
                kept.push((span, score));
            }
        }
        for (span, score) in kept {
            results.push(MatchedPair {
                doc_id: doc_id.to_string(),
                span,
                substring_tokens: doc.tokens[span.start..span.end].to_vec(),
                entity_id: entity.id,
                score_2ed: score,
            });
        }
    }
    results.sort_by(|a, b| {
        (a.span.start, a.span.end, a.entity_id).cmp(&(b.span.start, b.span.end, b.entity_id))
    });
    results
}

/// Column names of the matcher TSV, in order.
pub const MATCH_TSV_HEADER: &str =
    "doc_id\tspan_start\tspan_end\tsubstring\tentity_id\tentity_text\tscore_2ed";

/// One matcher output row, as written to and read from TSV.
///
/// Columns: doc_id, span_start, span_end, substring, entity_id,
/// entity_text, score_2ed. Scores are written with six decimals.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchRecord {
    pub doc_id: String,
    pub span_start: usize,
    pub span_end: usize,
    pub substring: String,
    pub entity_id: usize,
    pub entity_text: String,
    pub score_2ed: f64,
}

impl MatchRecord {
    pub fn from_pair(pair: &MatchedPair, entity_text: &str) -> MatchRecord {
        MatchRecord {
            doc_id: pair.doc_id.clone(),
            span_start: pair.span.start,
            span_end: pair.span.end,
            substring: pair.substring_tokens.join(" "),
            entity_id: pair.entity_id,
            entity_text: entity_text.to_string(),
            score_2ed: pair.score_2ed,
        }
    }

    pub fn to_tsv_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{:.6}",
            self.doc_id,
            self.span_start,
            self.span_end,
            self.substring,
            self.entity_id,
            self.entity_text,
            self.score_2ed
        )
    }

    pub fn parse_tsv_line(line: &str) -> std::result::Result<MatchRecord, String> {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 7 {
            return Err(format!("expected 7 tab-separated fields, got {}", fields.len()));
        }
        let span_start = fields[1]
            .parse()
            .map_err(|_| format!("bad span_start {:?}", fields[1]))?;
        let span_end = fields[2]
            .parse()
            .map_err(|_| format!("bad span_end {:?}", fields[2]))?;
        let entity_id = fields[4]
            .parse()
            .map_err(|_| format!("bad entity_id {:?}", fields[4]))?;
        let score_2ed = fields[6]
            .parse()
            .map_err(|_| format!("bad score {:?}", fields[6]))?;
        Ok(MatchRecord {
            doc_id: fields[0].to_string(),
            span_start,
            span_end,
            substring: fields[3].to_string(),
            entity_id,
            entity_text: fields[5].to_string(),
            score_2ed,
        })
    }
}

/// Read matcher TSV rows from a file, one record per non-empty line. A
/// leading header line is skipped.
pub fn read_match_records(path: &Path) -> Result<Vec<MatchRecord>> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        if line.is_empty() || (idx == 0 && line.starts_with("doc_id\t")) {
            continue;
        }
        let record =
            MatchRecord::parse_tsv_line(line).map_err(|msg| Error::parse(path, idx + 1, msg))?;
        records.push(record);
    }
    Ok(records)
}

/// Write matcher TSV rows to a file, header line first.
pub fn write_match_records(path: &Path, records: &[MatchRecord]) -> Result<()> {
    let mut out = String::from(MATCH_TSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.to_tsv_line());
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
