//! Evaluation of labelled match scores.
//!
//! Works from a list of (score, label) pairs where the label says whether
//! the matched pair was judged valid. Produces a confusion matrix at a
//! threshold, precision and recall, per-label score histograms, and an
//! ROC curve with its area.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Human judgement of a matched pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    /// The pair is a valid match.
    Y,
    /// The pair is spurious.
    N,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Y => "Y",
            Label::N => "N",
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Label, String> {
        match s {
            "Y" => Ok(Label::Y),
            "N" => Ok(Label::N),
            other => Err(format!("label must be Y or N, got {:?}", other)),
        }
    }
}

/// One scored, labelled item.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledScore {
    pub score: f64,
    pub label: Label,
}

/// Confusion counts at `threshold`: items scoring at or above it count as
/// returned. `total_relevant` is the full number of pairs that should
/// have been found; passing a number larger than the Y count lets misses
/// that never produced a score at all be included in `fn`.
pub fn confusion_at_threshold(
    items: &[LabeledScore],
    threshold: f64,
    total_relevant: usize,
) -> (usize, usize, usize) {
    let tp = items
        .iter()
        .filter(|i| i.label == Label::Y && i.score >= threshold)
        .count();
    let fp = items
        .iter()
        .filter(|i| i.label == Label::N && i.score >= threshold)
        .count();
    (tp, fp, total_relevant.saturating_sub(tp))
}

/// ROC curve over the items: thresholds sweep the distinct scores in
/// descending order, tied scores move in one step, and the curve starts
/// at (0,0) and ends at (1,1).
pub fn roc_curve(items: &[LabeledScore]) -> Result<Vec<(f64, f64)>> {
    let total_y = items.iter().filter(|i| i.label == Label::Y).count();
    let total_n = items.len() - total_y;
    if total_y == 0 || total_n == 0 {
        return Err(Error::SingleClass);
    }
    let mut sorted: Vec<&LabeledScore> = items.iter().collect();
    sorted.sort_by(|a, b| b.score.total_cmp(&a.score));

    let mut points = vec![(0.0, 0.0)];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < sorted.len() {
        let step_score = sorted[i].score;
        while i < sorted.len() && sorted[i].score == step_score {
            match sorted[i].label {
                Label::Y => tp += 1,
                Label::N => fp += 1,
            }
            i += 1;
        }
        points.push((fp as f64 / total_n as f64, tp as f64 / total_y as f64));
    }
    Ok(points)
}

/// Trapezoidal area under a curve of (x, y) points.
pub fn auc(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

/// One equal-width score bin and the items that fell into it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

/// Per-label histograms over [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreHistogram {
    pub y: Vec<HistogramBin>,
    pub n: Vec<HistogramBin>,
}

/// Bin the items into `bins` equal-width bins over [0,1], one series per
/// label. The top edge of the last bin is inclusive, so a score of
/// exactly 1 lands in it.
pub fn histogram(items: &[LabeledScore], bins: usize) -> Result<ScoreHistogram> {
    if bins == 0 {
        return Err(Error::InvalidParameter(
            "histogram needs at least one bin".into(),
        ));
    }
    let width = 1.0 / bins as f64;
    let empty: Vec<HistogramBin> = (0..bins)
        .map(|b| HistogramBin {
            lower: b as f64 * width,
            upper: if b + 1 == bins { 1.0 } else { (b + 1) as f64 * width },
            count: 0,
        })
        .collect();
    let mut out = ScoreHistogram {
        y: empty.clone(),
        n: empty,
    };
    for item in items {
        let idx = ((item.score.clamp(0.0, 1.0) * bins as f64).floor() as usize).min(bins - 1);
        let series = match item.label {
            Label::Y => &mut out.y,
            Label::N => &mut out.n,
        };
        series[idx].count += 1;
    }
    Ok(out)
}

/// Threshold metrics plus the full ROC curve.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub auc: f64,
    pub roc_points: Vec<(f64, f64)>,
}

/// Full evaluation: confusion counts at `threshold`, precision and
/// recall (0 when undefined), and the ROC curve with its area.
pub fn evaluate(
    items: &[LabeledScore],
    threshold: f64,
    total_relevant: usize,
) -> Result<EvalReport> {
    let (tp, fp, missed) = confusion_at_threshold(items, threshold, total_relevant);
    let roc_points = roc_curve(items)?;
    let area = auc(&roc_points);
    let precision = if tp + fp > 0 {
        tp as f64 / (tp + fp) as f64
    } else {
        0.0
    };
    let recall = if tp + missed > 0 {
        tp as f64 / (tp + missed) as f64
    } else {
        0.0
    };
    Ok(EvalReport {
        true_positives: tp,
        false_positives: fp,
        false_negatives: missed,
        precision,
        recall,
        auc: area,
        roc_points,
    })
}

/// A labelled pair as stored on disk: what was matched, against which
/// entity, its score, and the judgement.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRecord {
    pub substring: String,
    pub entity_text: String,
    pub score: f64,
    pub label: Label,
}

impl LabeledRecord {
    pub fn item(&self) -> LabeledScore {
        LabeledScore {
            score: self.score,
            label: self.label,
        }
    }

    pub fn to_tsv_line(&self) -> String {
        format!(
            "{}\t{}\t{:.6}\t{}",
            self.substring, self.entity_text, self.score, self.label
        )
    }

    pub fn parse_tsv_line(line: &str) -> std::result::Result<LabeledRecord, String> {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(format!(
                "expected 4 tab-separated fields, got {}",
                fields.len()
            ));
        }
        Ok(LabeledRecord {
            substring: fields[0].to_string(),
            entity_text: fields[1].to_string(),
            score: fields[2]
                .parse()
                .map_err(|_| format!("bad score {:?}", fields[2]))?,
            label: fields[3].parse()?,
        })
    }
}

/// Read a labels TSV (substring, entity, score, label; no header line).
pub fn read_labeled_records(path: &Path) -> Result<Vec<LabeledRecord>> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let record =
            LabeledRecord::parse_tsv_line(line).map_err(|msg| Error::parse(path, idx + 1, msg))?;
        records.push(record);
    }
    Ok(records)
}

/// Read a labels TSV, dropping malformed rows instead of failing.
/// Returns the good rows and how many were dropped.
pub fn read_labeled_records_lenient(path: &Path) -> Result<(Vec<LabeledRecord>, usize)> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    let mut skipped = 0;
    for line in content.lines() {
        if line.is_empty() {
            continue;
        }
        match LabeledRecord::parse_tsv_line(line) {
            Ok(r) => records.push(r),
            Err(_) => skipped += 1,
        }
    }
    Ok((records, skipped))
}

/// Write a labels TSV.
pub fn write_labeled_records(path: &Path, records: &[LabeledRecord]) -> Result<()> {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.to_tsv_line());
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
