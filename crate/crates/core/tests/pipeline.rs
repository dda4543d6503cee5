//! Drives the compiled binary through complete runs: generate data,
//! build a model, extract, rescore, evaluate, and check the error
//! paths' exit codes (0 success, 1 validation, 2 I/O).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn entext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entext"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn assert_ok(out: &Output, what: &str) {
    assert!(
        out.status.success(),
        "{} failed with {:?}\nstderr: {}",
        what,
        out.status.code(),
        stderr(out)
    );
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Generate the bundle and run build-lm, returning the directory.
fn prepared_bundle() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    let out = entext(&["fixtures", "--out-dir", path_str(&root)]);
    assert_ok(&out, "fixtures");
    let built = entext(&[
        "build-lm",
        "--corpus",
        path_str(&root.join("corpus.txt")),
        "--order",
        "3",
        "--out",
        path_str(&root.join("model.txt")),
    ]);
    assert_ok(&built, "build-lm");
    (dir, root)
}

fn run_extract(root: &Path, extra: &[&str]) -> Output {
    let mut args: Vec<String> = vec![
        "extract".into(),
        "--dictionary".into(),
        root.join("dictionary.txt").to_str().unwrap().into(),
        "--text".into(),
        root.join("documents.txt").to_str().unwrap().into(),
        "--out".into(),
        root.join("matches.tsv").to_str().unwrap().into(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    Command::new(env!("CARGO_BIN_EXE_entext"))
        .args(&args)
        .output()
        .expect("binary runs")
}

fn run_postprocess(root: &Path, out_name: &str, extra: &[&str]) -> Output {
    let out_path = root.join(out_name);
    let mut args = vec![
        "postprocess".to_string(),
        "--matches".into(),
        root.join("matches.tsv").to_str().unwrap().into(),
        "--lm-path".into(),
        root.join("model.txt").to_str().unwrap().into(),
        "--embeddings-path".into(),
        root.join("embeddings.txt").to_str().unwrap().into(),
        "--out".into(),
        out_path.to_str().unwrap().into(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    Command::new(env!("CARGO_BIN_EXE_entext"))
        .args(&args)
        .output()
        .expect("binary runs")
}

#[test]
fn full_pipeline_runs_clean() {
    let (_guard, root) = prepared_bundle();

    assert_ok(&run_extract(&root, &[]), "extract");
    let matches = std::fs::read_to_string(root.join("matches.tsv")).unwrap();
    assert!(matches.starts_with("doc_id\t"));
    assert_eq!(matches.lines().count(), 43, "header plus one row per planted pair");

    let post = run_postprocess(&root, "rescored.tsv", &[]);
    assert_ok(&post, "postprocess");
    let err = stderr(&post);
    for decision in [
        "ExactPassthrough",
        "PeriodFix",
        "TypoKeep2ED",
        "IntendedRescored",
        "OovKeep2ED",
        "StructuralKeep2ED",
    ] {
        assert!(err.contains(decision), "decision tally missing {}", decision);
    }

    let eval_dir = root.join("eval");
    let eval = entext(&[
        "evaluate",
        "--labels",
        path_str(&root.join("labels.tsv")),
        "--rescored",
        path_str(&root.join("rescored.tsv")),
        "--out-dir",
        path_str(&eval_dir),
    ]);
    assert_ok(&eval, "evaluate");
    let report = stdout(&eval);
    for key in [
        "tp\t", "fp\t", "fn\t", "precision\t", "recall\t", "auc_2ed\t", "auc_post\t",
        "auc_ratio\t", "auc_improvement_pct\t",
    ] {
        assert!(report.contains(key), "report missing {:?}\n{}", key, report);
    }
    for file in [
        "roc_2ed.csv",
        "roc_post.csv",
        "histogram_2ed.csv",
        "histogram_post.csv",
    ] {
        let content = std::fs::read_to_string(eval_dir.join(file)).unwrap();
        assert!(content.lines().count() > 1, "{} is empty", file);
    }

    // The fixture's rescoring must improve the ranking.
    let auc_2ed: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("auc_2ed\t"))
        .unwrap()
        .parse()
        .unwrap();
    let auc_post: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("auc_post\t"))
        .unwrap()
        .parse()
        .unwrap();
    assert!(auc_post > auc_2ed);
}

#[test]
fn evaluate_without_rescored_reports_single_auc() {
    let (_guard, root) = prepared_bundle();
    let eval = entext(&["evaluate", "--labels", path_str(&root.join("labels.tsv"))]);
    assert_ok(&eval, "evaluate");
    let report = stdout(&eval);
    assert!(report.contains("auc\t"));
    assert!(!report.contains("auc_post"));
}

#[test]
fn extract_on_empty_input_emits_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    std::fs::write(root.join("dictionary.txt"), "west bank\n").unwrap();
    std::fs::write(root.join("documents.txt"), "").unwrap();
    let out = entext(&[
        "extract",
        "--dictionary",
        path_str(&root.join("dictionary.txt")),
        "--text",
        path_str(&root.join("documents.txt")),
        "--out",
        path_str(&root.join("matches.tsv")),
    ]);
    assert_ok(&out, "extract");
    let tsv = std::fs::read_to_string(root.join("matches.tsv")).unwrap();
    assert_eq!(tsv, "doc_id\tspan_start\tspan_end\tsubstring\tentity_id\tentity_text\tscore_2ed\n");
}

#[test]
fn extract_without_out_prints_tsv_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    std::fs::write(root.join("dictionary.txt"), "west bank\n").unwrap();
    std::fs::write(root.join("documents.txt"), "tourists crossed the west bank today\n").unwrap();
    let out = entext(&[
        "extract",
        "--dictionary",
        path_str(&root.join("dictionary.txt")),
        "--text",
        path_str(&root.join("documents.txt")),
    ]);
    assert_ok(&out, "extract");
    let text = stdout(&out);
    assert!(text.starts_with("doc_id\t"));
    assert!(text.contains("west bank"));
}

#[test]
fn delta_one_keeps_only_exact_matches() {
    let (_guard, root) = prepared_bundle();
    assert_ok(&run_extract(&root, &["--delta", "1.0"]), "extract");
    let tsv = std::fs::read_to_string(root.join("matches.tsv")).unwrap();
    let rows: Vec<&str> = tsv.lines().skip(1).collect();
    assert_eq!(rows.len(), 8, "only the verbatim mentions survive");
    for row in rows {
        assert!(row.ends_with("1.000000"), "non-exact row kept: {}", row);
    }
}

#[test]
fn missing_input_exits_with_io_code() {
    let out = entext(&[
        "extract",
        "--dictionary",
        "/nonexistent/dict.txt",
        "--text",
        "/nonexistent/docs.txt",
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("error:"));
}

#[test]
fn invalid_parameter_exits_with_validation_code() {
    let (_guard, root) = prepared_bundle();
    let out = run_extract(&root, &["--delta", "1.5"]);
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr(&out));
}

#[test]
fn single_class_labels_exit_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let labels = dir.path().join("labels.tsv");
    std::fs::write(&labels, "a\tb\t0.9\tY\nc\td\t0.8\tY\n").unwrap();
    let out = entext(&["evaluate", "--labels", path_str(&labels)]);
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr(&out));
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    let bad = entext(&["extract", "--no-such-flag"]);
    assert_eq!(bad.status.code(), Some(1));
    let help = entext(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("entext"));
    let version = entext(&["--version"]);
    assert_eq!(version.status.code(), Some(0));
}

#[test]
fn skip_bad_rows_tolerates_malformed_labels() {
    let dir = tempfile::tempdir().unwrap();
    let labels = dir.path().join("labels.tsv");
    std::fs::write(
        &labels,
        "a\tb\t0.9\tY\nnot a label row\nc\td\t0.2\tN\n",
    )
    .unwrap();
    let strict = entext(&["evaluate", "--labels", path_str(&labels)]);
    assert_eq!(strict.status.code(), Some(1));
    let lenient = entext(&["evaluate", "--labels", path_str(&labels), "--skip-bad-rows"]);
    assert_ok(&lenient, "evaluate --skip-bad-rows");
    assert!(stderr(&lenient).contains("skipped 1"));
}

#[test]
fn base_flag_changes_only_rescored_rows() {
    let (_guard, root) = prepared_bundle();
    assert_ok(&run_extract(&root, &[]), "extract");
    assert_ok(&run_postprocess(&root, "rescored_e.tsv", &[]), "postprocess");
    assert_ok(
        &run_postprocess(&root, "rescored_10.tsv", &["--base", "10"]),
        "postprocess --base 10",
    );
    let read_rows = |name: &str| -> Vec<(String, String, String)> {
        std::fs::read_to_string(root.join(name))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split('\t').collect();
                // (substring, final_score, decision)
                (f[3].to_string(), f[7].to_string(), f[8].to_string())
            })
            .collect()
    };
    let default_rows = read_rows("rescored_e.tsv");
    let base10_rows = read_rows("rescored_10.tsv");
    assert_eq!(default_rows.len(), base10_rows.len());
    let mut rescored_seen = 0;
    for (d, b) in default_rows.iter().zip(&base10_rows) {
        assert_eq!(d.0, b.0);
        assert_eq!(d.2, b.2, "decision changed for {}", d.0);
        if d.2 == "IntendedRescored" {
            rescored_seen += 1;
            assert_ne!(d.1, b.1, "base change left {} unchanged", d.0);
        } else {
            assert_eq!(d.1, b.1, "base change moved non-rescored {}", d.0);
        }
    }
    assert!(rescored_seen > 0);
}

#[test]
fn period_fix_flag_disables_repair() {
    let (_guard, root) = prepared_bundle();
    assert_ok(&run_extract(&root, &[]), "extract");
    let out = run_postprocess(&root, "rescored_nofix.tsv", &["--no-strip-period-fix"]);
    assert_ok(&out, "postprocess --no-strip-period-fix");
    let tsv = std::fs::read_to_string(root.join("rescored_nofix.tsv")).unwrap();
    assert!(!tsv.contains("PeriodFix"));
    for line in tsv.lines().skip(1) {
        let f: Vec<&str> = line.split('\t').collect();
        if f[3].ends_with('.') {
            assert_eq!(f[6], f[7], "period pair rescored despite disabled fix: {}", line);
        }
    }
}

#[test]
fn counts_tsv_ingestion_builds_a_model() {
    let dir = tempfile::tempdir().unwrap();
    let counts = dir.path().join("counts.tsv");
    // Mixed plain and per-year rows; the per-year rows aggregate.
    std::fs::write(
        &counts,
        "code\t7\ncode of\t1999\t2\t1\ncode of\t2000\t3\t1\nof\t9\nbroken row without count\n",
    )
    .unwrap();
    let model_path = dir.path().join("model.txt");
    let out = entext(&[
        "build-lm",
        "--counts",
        path_str(&counts),
        "--order",
        "2",
        "--out",
        path_str(&model_path),
    ]);
    assert_ok(&out, "build-lm --counts");
    let report = stdout(&out);
    assert!(report.contains("order\t2"), "{}", report);
    assert!(report.contains("unigrams\t16"), "{}", report);
    assert!(report.contains("ngrams\t3"), "{}", report);
    assert!(stderr(&out).contains("1 malformed"));
    let saved = std::fs::read_to_string(&model_path).unwrap();
    assert!(saved.contains("code of\t5"));
}
