//! Drives the exported C symbols end to end from Rust.

use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use entext_capi::*;

fn c_path(path: &Path) -> CString {
    CString::new(path.to_str().unwrap()).unwrap()
}

/// Writes the deterministic fixture bundle plus a saved trigram model into a
/// temporary directory.
fn bundle() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let fixture = entext::fixtures::generate(42);
    fixture.write_all(dir.path()).unwrap();
    let lm = entext::ngram::build_model_from_lines(
        fixture.corpus_lines.iter().map(String::as_str),
        3,
        &entext::TokenizerConfig::default(),
    )
    .unwrap();
    lm.save(&dir.path().join("model.txt")).unwrap();
    dir
}

unsafe fn load_all(
    dir: &Path,
) -> (
    *mut EntextDictionary,
    *mut EntextLanguageModel,
    *mut EntextEmbeddings,
) {
    let mut dictionary = ptr::null_mut();
    let path = c_path(&dir.join("dictionary.txt"));
    assert_eq!(
        entext_dictionary_load(path.as_ptr(), false, &mut dictionary),
        EntextStatus::Ok
    );
    let mut lm = ptr::null_mut();
    let path = c_path(&dir.join("model.txt"));
    assert_eq!(entext_lm_load(path.as_ptr(), &mut lm), EntextStatus::Ok);
    let mut embeddings = ptr::null_mut();
    let path = c_path(&dir.join("embeddings.txt"));
    assert_eq!(
        entext_embeddings_load(path.as_ptr(), &mut embeddings),
        EntextStatus::Ok
    );
    (dictionary, lm, embeddings)
}

unsafe fn free_all(
    dictionary: *mut EntextDictionary,
    lm: *mut EntextLanguageModel,
    embeddings: *mut EntextEmbeddings,
) {
    entext_dictionary_free(dictionary);
    entext_lm_free(lm);
    entext_embeddings_free(embeddings);
}

#[test]
fn full_cycle_produces_rescored_rows() {
    let dir = bundle();
    unsafe {
        let (dictionary, lm, embeddings) = load_all(dir.path());
        assert_eq!(entext_dictionary_entity_count(dictionary), 18);
        assert_eq!(entext_lm_order(lm), 3);

        let documents = std::fs::read_to_string(dir.path().join("documents.txt")).unwrap();
        let text = CString::new(documents).unwrap();
        let mut matches_ptr: *mut c_char = ptr::null_mut();
        assert_eq!(
            entext_extract_tsv(dictionary, text.as_ptr(), ptr::null(), &mut matches_ptr),
            EntextStatus::Ok
        );
        let matches = CStr::from_ptr(matches_ptr).to_str().unwrap().to_owned();
        assert!(matches.starts_with("doc_id\t"));
        assert_eq!(matches.lines().count(), 43);

        let matches_c = CString::new(matches).unwrap();
        let mut rescored_ptr: *mut c_char = ptr::null_mut();
        assert_eq!(
            entext_postprocess_tsv(
                lm,
                embeddings,
                matches_c.as_ptr(),
                ptr::null(),
                &mut rescored_ptr
            ),
            EntextStatus::Ok
        );
        let rescored = CStr::from_ptr(rescored_ptr).to_str().unwrap().to_owned();
        assert_eq!(rescored.lines().count(), 43);
        assert!(rescored.contains("PeriodFix"));
        assert!(rescored.contains("IntendedRescored"));
        assert!(rescored.contains("TypoKeep2ED"));

        entext_string_free(matches_ptr);
        entext_string_free(rescored_ptr);
        free_all(dictionary, lm, embeddings);
    }
}

#[test]
fn failed_calls_report_status_and_message() {
    unsafe {
        let mut dictionary = ptr::null_mut();
        let missing = CString::new("/nonexistent/dictionary.txt").unwrap();
        assert_eq!(
            entext_dictionary_load(missing.as_ptr(), false, &mut dictionary),
            EntextStatus::Io
        );
        let message_ptr = entext_last_error_message();
        assert!(!message_ptr.is_null());
        let message = CStr::from_ptr(message_ptr).to_str().unwrap();
        assert!(message.contains("/nonexistent/dictionary.txt"));

        assert_eq!(
            entext_dictionary_load(ptr::null(), false, &mut dictionary),
            EntextStatus::NullArgument
        );

        let invalid = [0xffu8, 0xfe, 0x00];
        assert_eq!(
            entext_dictionary_load(invalid.as_ptr() as *const c_char, false, &mut dictionary),
            EntextStatus::InvalidUtf8
        );

        let path = CString::new("dictionary.txt").unwrap();
        assert_eq!(
            entext_dictionary_load(path.as_ptr(), false, ptr::null_mut()),
            EntextStatus::NullArgument
        );
    }
}

#[test]
fn option_ranges_and_probes_are_enforced() {
    let dir = bundle();
    unsafe {
        let (dictionary, lm, embeddings) = load_all(dir.path());

        let mut options = entext_extract_options_default();
        options.delta = 1.5;
        let text = CString::new("harvest island honour").unwrap();
        let mut out: *mut c_char = ptr::null_mut();
        assert_eq!(
            entext_extract_tsv(dictionary, text.as_ptr(), &options, &mut out),
            EntextStatus::Validation
        );

        let mut log_prob = 0.0f64;
        let seen = CString::new("honour").unwrap();
        assert_eq!(
            entext_lm_log_prob(lm, seen.as_ptr(), 0.4, &mut log_prob),
            EntextStatus::Ok
        );
        assert!(log_prob.is_finite());
        assert!(log_prob < 0.0);
        let empty = CString::new("   ").unwrap();
        assert_eq!(
            entext_lm_log_prob(lm, empty.as_ptr(), 0.4, &mut log_prob),
            EntextStatus::Validation
        );

        let mut cosine = 0.0f64;
        let first = CString::new("honour").unwrap();
        let second = CString::new("honor").unwrap();
        assert_eq!(
            entext_embeddings_cosine(embeddings, first.as_ptr(), second.as_ptr(), &mut cosine),
            EntextStatus::Ok
        );
        assert!(cosine > 0.5, "variant pair cosine was {cosine}");
        let unknown = CString::new("zzzzunknown").unwrap();
        assert_eq!(
            entext_embeddings_cosine(embeddings, first.as_ptr(), unknown.as_ptr(), &mut cosine),
            EntextStatus::Validation
        );

        let malformed = CString::new("only\ttwo").unwrap();
        let mut rescored: *mut c_char = ptr::null_mut();
        assert_eq!(
            entext_postprocess_tsv(lm, embeddings, malformed.as_ptr(), ptr::null(), &mut rescored),
            EntextStatus::Validation
        );
        let message = CStr::from_ptr(entext_last_error_message())
            .to_str()
            .unwrap();
        assert!(message.contains("row 1"));

        free_all(dictionary, lm, embeddings);
    }
}

#[test]
fn frees_tolerate_null_pointers() {
    unsafe {
        entext_string_free(ptr::null_mut());
        entext_dictionary_free(ptr::null_mut());
        entext_lm_free(ptr::null_mut());
        entext_embeddings_free(ptr::null_mut());
    }
}

#[test]
fn generated_header_declares_the_surface() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/entext.h")).unwrap();
    for symbol in [
        "EntextStatus",
        "EntextExtractOptions",
        "EntextRescoreOptions",
        "entext_dictionary_load",
        "entext_lm_load",
        "entext_embeddings_load",
        "entext_extract_tsv",
        "entext_postprocess_tsv",
        "entext_string_free",
        "entext_last_error_message",
        "entext_version",
    ] {
        assert!(header.contains(symbol), "header is missing {symbol}");
    }
}
