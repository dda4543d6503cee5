//! Command-line front end for the extraction pipeline.
//!
//! Subcommands mirror the pipeline stages: `build-lm` trains or ingests
//! an n-gram model, `extract` matches a dictionary against documents,
//! `postprocess` rescores the matches with the model and embeddings,
//! `evaluate` measures labelled results, and `fixtures` writes the
//! seeded synthetic bundle. Exit codes: 0 success, 1 validation error,
//! 2 I/O error.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use entext::dictionary::load_dictionary;
use entext::embeddings::load_embeddings;
use entext::error::{Error, Result};
use entext::eval::{
    auc, evaluate, histogram, read_labeled_records, read_labeled_records_lenient, roc_curve,
    Label, LabeledScore, ScoreHistogram,
};
use entext::fixtures;
use entext::matcher::{
    extract, read_match_records, write_match_records, ExtractConfig, MatchRecord,
    MATCH_TSV_HEADER,
};
use entext::ngram::{build_model, ingest_counts, NgramModel, ValidityThresholds};
use entext::postprocess::{
    postprocess_records, write_rescored_records, Decision, RescoreConfig, RescoredRecord,
    RESCORED_TSV_HEADER,
};
use entext::tokenizer::{tokenize, TokenizerConfig};

#[derive(Parser)]
#[command(
    name = "entext",
    version,
    about = "Approximate dictionary entity extraction with LM and embedding rescoring"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an n-gram model from corpus text or a counts TSV.
    BuildLm(BuildLmArgs),
    /// Match dictionary entities against documents.
    Extract(ExtractArgs),
    /// Rescore matcher output with an n-gram model and embeddings.
    Postprocess(PostprocessArgs),
    /// Score labelled results: confusion, precision/recall, ROC/AUC.
    Evaluate(EvaluateArgs),
    /// Write the seeded synthetic data bundle.
    Fixtures(FixturesArgs),
}

#[derive(Args)]
struct BuildLmArgs {
    /// Corpus text files, one sentence or document per line.
    #[arg(long, num_args = 1.., required_unless_present = "counts")]
    corpus: Vec<PathBuf>,
    /// Pre-aggregated counts TSV (ngram TAB count, or Google-style
    /// ngram TAB year TAB match_count TAB volume_count).
    #[arg(long, conflicts_with = "corpus")]
    counts: Option<PathBuf>,
    /// Maximum n-gram length to store.
    #[arg(long, default_value_t = 3)]
    order: usize,
    /// Where to write the model file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExtractArgs {
    /// Dictionary file, one entity per line.
    #[arg(long)]
    dictionary: PathBuf,
    /// Documents to scan, one document per line; document ids are
    /// 1-based line numbers.
    #[arg(long)]
    text: PathBuf,
    /// Token-level score threshold for keeping a match.
    #[arg(long, default_value_t = 0.8)]
    delta: f64,
    /// Character-level similarity threshold for token substitution.
    #[arg(long, default_value_t = 0.8)]
    tau: f64,
    /// Allow candidate windows this many tokens longer than the entity.
    #[arg(long, default_value_t = 2)]
    max_span_slack: usize,
    /// Strip one trailing period from each token while tokenizing.
    #[arg(long)]
    strip_period: bool,
    /// Output TSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PostprocessArgs {
    /// Matcher TSV to rescore.
    #[arg(long)]
    matches: PathBuf,
    /// N-gram model file.
    #[arg(long)]
    lm_path: PathBuf,
    /// Word-embedding file (word2vec text format).
    #[arg(long)]
    embeddings_path: PathBuf,
    /// An n-gram is plausible when its log10 probability exceeds this.
    #[arg(long, default_value_t = -10.8, allow_hyphen_values = true)]
    logprob_threshold: f64,
    /// ...and its raw count exceeds this.
    #[arg(long, default_value_t = 0)]
    count_threshold: u64,
    /// Backoff multiplier per dropped context word.
    #[arg(long, default_value_t = 0.4)]
    backoff_alpha: f64,
    /// Base of the exponential cosine-to-distance normalization.
    #[arg(long, default_value_t = std::f64::consts::E)]
    base: f64,
    /// Keep trailing-period pairs at their original score instead of
    /// repairing them to 1.
    #[arg(long)]
    no_strip_period_fix: bool,
    /// Character-level similarity threshold for divergence alignment.
    #[arg(long, default_value_t = 0.8)]
    tau: f64,
    /// Strip one trailing period from entity tokens while tokenizing.
    #[arg(long)]
    strip_period: bool,
    /// Output TSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Labels TSV: substring, entity, score, label (Y or N).
    #[arg(long)]
    labels: PathBuf,
    /// Rescored TSV to compare against; enables side-by-side reporting
    /// of the label scores versus the rescored final scores.
    #[arg(long)]
    rescored: Option<PathBuf>,
    /// Score threshold for the confusion counts.
    #[arg(long, default_value_t = 0.8)]
    threshold: f64,
    /// Total relevant pairs; defaults to the number of Y labels.
    #[arg(long)]
    total_relevant: Option<usize>,
    /// Histogram bin count.
    #[arg(long, default_value_t = 10)]
    bins: usize,
    /// Skip malformed label rows instead of failing.
    #[arg(long)]
    skip_bad_rows: bool,
    /// Directory for ROC and histogram CSV files.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct FixturesArgs {
    /// Directory to write the bundle into (created if missing).
    #[arg(long)]
    out_dir: PathBuf,
    /// Generator seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    let result = match cli.command {
        Command::BuildLm(args) => cmd_build_lm(args),
        Command::Extract(args) => cmd_extract(args),
        Command::Postprocess(args) => cmd_postprocess(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Fixtures(args) => cmd_fixtures(args),
    };
    if let Err(err) = result {
        eprintln!("error: {}", err);
        std::process::exit(if err.is_io() { 2 } else { 1 });
    }
}

fn cmd_build_lm(args: BuildLmArgs) -> Result<()> {
    let model = if let Some(counts) = &args.counts {
        let (model, stats) = ingest_counts(counts, args.order)?;
        eprintln!(
            "ingested {} rows, skipped {} malformed and {} over order",
            stats.accepted_rows, stats.malformed_rows, stats.over_order_rows
        );
        model
    } else {
        build_model(&args.corpus, args.order, &TokenizerConfig::default())?
    };
    model.save(&args.out)?;
    println!("order\t{}", model.order());
    println!("unigrams\t{}", model.total_unigrams());
    println!("ngrams\t{}", model.len());
    Ok(())
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(content.lines().map(str::to_string).collect())
}

fn cmd_extract(args: ExtractArgs) -> Result<()> {
    let tokenizer = TokenizerConfig {
        strip_trailing_period: args.strip_period,
        ..TokenizerConfig::default()
    };
    let config = ExtractConfig {
        delta: args.delta,
        tau: args.tau,
        max_span_slack: args.max_span_slack,
    };
    if !(0.0..=1.0).contains(&args.delta) || !(0.0..=1.0).contains(&args.tau) {
        return Err(Error::InvalidParameter(
            "delta and tau must lie in [0, 1]".into(),
        ));
    }
    let dictionary = load_dictionary(&args.dictionary, &tokenizer)?;
    let lines = read_lines(&args.text)?;
    let mut records = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        let seq = tokenize(line, &tokenizer);
        for pair in extract(&(i + 1).to_string(), &seq, &dictionary, &config) {
            let entity_text = &dictionary.entities[pair.entity_id].text;
            records.push(MatchRecord::from_pair(&pair, entity_text));
        }
    }
    match &args.out {
        Some(path) => write_match_records(path, &records)?,
        None => {
            println!("{}", MATCH_TSV_HEADER);
            for r in &records {
                println!("{}", r.to_tsv_line());
            }
        }
    }
    eprintln!("{} matches from {} documents", records.len(), lines.len());
    Ok(())
}

fn cmd_postprocess(args: PostprocessArgs) -> Result<()> {
    let config = RescoreConfig {
        base: args.base,
        thresholds: ValidityThresholds {
            logprob_min: args.logprob_threshold,
            count_min: args.count_threshold,
            backoff_alpha: args.backoff_alpha,
        },
        strip_period_fix: !args.no_strip_period_fix,
        tau: args.tau,
    };
    let tokenizer = TokenizerConfig {
        strip_trailing_period: args.strip_period,
        ..TokenizerConfig::default()
    };
    let records = read_match_records(&args.matches)?;
    let lm = NgramModel::load(&args.lm_path)?;
    let embeddings = load_embeddings(&args.embeddings_path)?;
    let rescored = postprocess_records(&records, &lm, &embeddings, &config, &tokenizer)?;

    match &args.out {
        Some(path) => write_rescored_records(path, &rescored)?,
        None => {
            println!("{}", RESCORED_TSV_HEADER);
            for r in &rescored {
                println!("{}", r.to_tsv_line());
            }
        }
    }
    let mut counts: HashMap<Decision, usize> = HashMap::new();
    for r in &rescored {
        *counts.entry(r.decision).or_default() += 1;
    }
    for decision in Decision::ALL {
        eprintln!("{}\t{}", decision, counts.get(&decision).copied().unwrap_or(0));
    }
    Ok(())
}

/// Key a rescored record the way label rows reference pairs.
fn join_key(record: &RescoredRecord) -> (String, String) {
    (
        record.record.substring.clone(),
        record.record.entity_text.clone(),
    )
}

fn write_roc_csv(path: &Path, points: &[(f64, f64)]) -> Result<()> {
    let mut out = String::from("fpr,tpr\n");
    for (fpr, tpr) in points {
        out.push_str(&format!("{},{}\n", fpr, tpr));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn write_histogram_csv(path: &Path, hist: &ScoreHistogram) -> Result<()> {
    let mut out = String::from("label,bin_lower,bin_upper,count\n");
    for (label, series) in [(Label::Y, &hist.y), (Label::N, &hist.n)] {
        for bin in series {
            out.push_str(&format!("{},{},{},{}\n", label, bin.lower, bin.upper, bin.count));
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let labels = if args.skip_bad_rows {
        let (rows, skipped) = read_labeled_records_lenient(&args.labels)?;
        if skipped > 0 {
            eprintln!("skipped {} malformed label rows", skipped);
        }
        rows
    } else {
        read_labeled_records(&args.labels)?
    };
    let total_relevant = args
        .total_relevant
        .unwrap_or_else(|| labels.iter().filter(|l| l.label == Label::Y).count());

    if let Some(rescored_path) = &args.rescored {
        let rescored = entext::postprocess::read_rescored_records(rescored_path)?;
        let final_scores: HashMap<(String, String), f64> = rescored
            .iter()
            .map(|r| (join_key(r), r.final_score))
            .collect();
        let mut raw_items = Vec::with_capacity(labels.len());
        let mut post_items = Vec::with_capacity(labels.len());
        for label in &labels {
            let key = (label.substring.clone(), label.entity_text.clone());
            let final_score = final_scores.get(&key).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "label pair ({:?}, {:?}) has no row in {}",
                    label.substring,
                    label.entity_text,
                    rescored_path.display()
                ))
            })?;
            raw_items.push(LabeledScore {
                score: label.score,
                label: label.label,
            });
            post_items.push(LabeledScore {
                score: *final_score,
                label: label.label,
            });
        }
        let report = evaluate(&post_items, args.threshold, total_relevant)?;
        let auc_raw = auc(&roc_curve(&raw_items)?);
        let auc_post = report.auc;
        println!("tp\t{}", report.true_positives);
        println!("fp\t{}", report.false_positives);
        println!("fn\t{}", report.false_negatives);
        println!("precision\t{:.6}", report.precision);
        println!("recall\t{:.6}", report.recall);
        println!("auc_2ed\t{:.6}", auc_raw);
        println!("auc_post\t{:.6}", auc_post);
        println!("auc_ratio\t{:.6}", auc_post / auc_raw);
        println!("auc_improvement_pct\t{:.6}", (auc_post - auc_raw) / auc_raw * 100.0);
        if let Some(dir) = &args.out_dir {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            write_roc_csv(&dir.join("roc_2ed.csv"), &roc_curve(&raw_items)?)?;
            write_roc_csv(&dir.join("roc_post.csv"), &report.roc_points)?;
            write_histogram_csv(&dir.join("histogram_2ed.csv"), &histogram(&raw_items, args.bins)?)?;
            write_histogram_csv(&dir.join("histogram_post.csv"), &histogram(&post_items, args.bins)?)?;
        }
    } else {
        let items: Vec<LabeledScore> = labels.iter().map(|l| l.item()).collect();
        let report = evaluate(&items, args.threshold, total_relevant)?;
        println!("tp\t{}", report.true_positives);
        println!("fp\t{}", report.false_positives);
        println!("fn\t{}", report.false_negatives);
        println!("precision\t{:.6}", report.precision);
        println!("recall\t{:.6}", report.recall);
        println!("auc\t{:.6}", report.auc);
        if let Some(dir) = &args.out_dir {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            write_roc_csv(&dir.join("roc.csv"), &report.roc_points)?;
            write_histogram_csv(&dir.join("histogram.csv"), &histogram(&items, args.bins)?)?;
        }
    }
    Ok(())
}

fn cmd_fixtures(args: FixturesArgs) -> Result<()> {
    let fixture = fixtures::generate(args.seed);
    std::fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;
    fixture.write_all(&args.out_dir)?;
    println!("entities\t{}", fixture.dictionary_lines.len());
    println!("corpus_lines\t{}", fixture.corpus_lines.len());
    println!("documents\t{}", fixture.documents.len());
    println!("embedding_words\t{}", fixture.embeddings.len());
    println!("label_rows\t{}", fixture.labels.len());
    eprintln!(
        "wrote dictionary.txt, corpus.txt, documents.txt, embeddings.txt, labels.tsv to {}",
        args.out_dir.display()
    );
    Ok(())
}
