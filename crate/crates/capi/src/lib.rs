//! C interface to the extraction pipeline.
//!
//! Dictionaries, language models, and embedding tables are loaded into opaque
//! handles that must be released with the matching `_free` function. Fallible
//! calls return an [`EntextStatus`]; on failure a thread-local message is
//! recorded and can be read with [`entext_last_error_message`]. Extraction and
//! rescoring exchange data as TSV strings so callers do not need to mirror any
//! internal structs.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use entext::matcher::{MatchRecord, MATCH_TSV_HEADER};
use entext::postprocess::{postprocess_records, RESCORED_TSV_HEADER};
use entext::{
    extract, load_dictionary, load_embeddings, tokenize, Dictionary, EmbeddingStore, Error,
    ExtractConfig, NgramModel, RescoreConfig, TokenizerConfig, ValidityThresholds,
};

/// Result code for every fallible call in this interface.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EntextStatus {
    /// The call succeeded.
    Ok = 0,
    /// Invalid input: bad parameter value, malformed data, or an
    /// out-of-vocabulary lookup.
    Validation = 1,
    /// The underlying file could not be read or written.
    Io = 2,
    /// A required pointer argument was null.
    NullArgument = 3,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 4,
    /// An unexpected internal failure; report this as a bug.
    Internal = 5,
}

/// Knobs for [`entext_extract_tsv`]. Obtain defaults from
/// [`entext_extract_options_default`] and override selectively.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct EntextExtractOptions {
    /// Token-level score threshold in [0, 1]; pairs scoring below it are dropped.
    pub delta: f64,
    /// Character-level similarity threshold in [0, 1] gating substitutions.
    pub tau: f64,
    /// Extra tokens a candidate window may have beyond the entity length.
    pub max_span_slack: usize,
}

/// Knobs for [`entext_postprocess_tsv`]. Obtain defaults from
/// [`entext_rescore_options_default`] and override selectively.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct EntextRescoreOptions {
    /// Base of the exponential distance normalization; must exceed 1.
    pub base: f64,
    /// Minimum log10 probability (exclusive) for an n-gram to count as attested.
    pub logprob_threshold: f64,
    /// Minimum raw count (exclusive) for an n-gram to count as attested.
    pub count_threshold: u64,
    /// Stupid-backoff multiplier per dropped context word.
    pub backoff_alpha: f64,
    /// Repair pairs that differ only by trailing periods.
    pub strip_period_fix: bool,
    /// Character-level similarity threshold in [0, 1], reused from extraction.
    pub tau: f64,
    /// Strip trailing periods when re-tokenizing entity text.
    pub strip_trailing_period: bool,
}

/// Opaque handle to a loaded dictionary plus the tokenizer settings it was
/// loaded with.
pub struct EntextDictionary {
    dictionary: Dictionary,
    tokenizer: TokenizerConfig,
}

/// Opaque handle to a loaded n-gram language model.
pub struct EntextLanguageModel {
    model: NgramModel,
}

/// Opaque handle to a loaded word-embedding table.
pub struct EntextEmbeddings {
    store: EmbeddingStore,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    let stored = CString::new(sanitized).expect("no interior NUL after replacement");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(stored));
}

fn fail(status: EntextStatus, message: &str) -> EntextStatus {
    set_last_error(message);
    status
}

fn fail_from(err: &Error) -> EntextStatus {
    let status = if err.is_io() {
        EntextStatus::Io
    } else {
        EntextStatus::Validation
    };
    fail(status, &err.to_string())
}

fn guarded(body: impl FnOnce() -> EntextStatus) -> EntextStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(EntextStatus::Internal, "internal panic"),
    }
}

/// Reads a required C string argument. Reports null and invalid UTF-8 through
/// the status channel.
unsafe fn str_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, EntextStatus> {
    if ptr.is_null() {
        return Err(fail(
            EntextStatus::NullArgument,
            &format!("{name} must not be null"),
        ));
    }
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| fail(EntextStatus::InvalidUtf8, &format!("{name} is not valid UTF-8")))
}

unsafe fn handle_arg<'a, T>(ptr: *const T, name: &str) -> Result<&'a T, EntextStatus> {
    match unsafe { ptr.as_ref() } {
        Some(handle) => Ok(handle),
        None => Err(fail(
            EntextStatus::NullArgument,
            &format!("{name} must not be null"),
        )),
    }
}

/// Converts an owned string into a heap-allocated C string handed to the
/// caller. The caller releases it with [`entext_string_free`].
fn emit_string(text: String, out: *mut *mut c_char) -> EntextStatus {
    match CString::new(text) {
        Ok(owned) => {
            unsafe { *out = owned.into_raw() };
            EntextStatus::Ok
        }
        Err(_) => fail(
            EntextStatus::Validation,
            "output contains an interior NUL byte",
        ),
    }
}

/// Returns the crate version as a static NUL-terminated string. Never free
/// this pointer.
#[no_mangle]
pub extern "C" fn entext_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Returns the message recorded by the most recent failing call on this
/// thread, or null if no call has failed yet. The pointer stays valid until
/// the next failing call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn entext_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| match slot.borrow().as_ref() {
        Some(message) => message.as_ptr(),
        None => ptr::null(),
    })
}

/// Releases a string returned by this interface. Null is ignored.
///
/// # Safety
///
/// `s` must be null or a pointer previously returned through an `out`
/// parameter of this interface, and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn entext_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Returns the default extraction options.
#[no_mangle]
pub extern "C" fn entext_extract_options_default() -> EntextExtractOptions {
    let config = ExtractConfig::default();
    EntextExtractOptions {
        delta: config.delta,
        tau: config.tau,
        max_span_slack: config.max_span_slack,
    }
}

/// Returns the default rescoring options.
#[no_mangle]
pub extern "C" fn entext_rescore_options_default() -> EntextRescoreOptions {
    let config = RescoreConfig::default();
    EntextRescoreOptions {
        base: config.base,
        logprob_threshold: config.thresholds.logprob_min,
        count_threshold: config.thresholds.count_min,
        backoff_alpha: config.thresholds.backoff_alpha,
        strip_period_fix: config.strip_period_fix,
        tau: config.tau,
        strip_trailing_period: false,
    }
}

/// Loads a dictionary from a text file, one entity per line. Tokens are
/// lowercased; `strip_trailing_period` additionally removes one trailing `.`
/// from multi-character tokens.
///
/// # Safety
///
/// `path` must be null or a NUL-terminated string. `out` must point to
/// writable storage for one pointer; on success it receives a handle that
/// must be released with [`entext_dictionary_free`].
#[no_mangle]
pub unsafe extern "C" fn entext_dictionary_load(
    path: *const c_char,
    strip_trailing_period: bool,
    out: *mut *mut EntextDictionary,
) -> EntextStatus {
    guarded(|| {
        if out.is_null() {
            return fail(EntextStatus::NullArgument, "out must not be null");
        }
        let path = match unsafe { str_arg(path, "path") } {
            Ok(value) => value,
            Err(status) => return status,
        };
        let tokenizer = TokenizerConfig {
            strip_trailing_period,
            ..TokenizerConfig::default()
        };
        match load_dictionary(Path::new(path), &tokenizer) {
            Ok(dictionary) => {
                let handle = EntextDictionary {
                    dictionary,
                    tokenizer,
                };
                unsafe { *out = Box::into_raw(Box::new(handle)) };
                EntextStatus::Ok
            }
            Err(err) => fail_from(&err),
        }
    })
}

/// Returns the number of entities in a dictionary, or 0 for null.
///
/// # Safety
///
/// `dictionary` must be null or a live handle from
/// [`entext_dictionary_load`].
#[no_mangle]
pub unsafe extern "C" fn entext_dictionary_entity_count(
    dictionary: *const EntextDictionary,
) -> usize {
    match unsafe { dictionary.as_ref() } {
        Some(handle) => handle.dictionary.entity_count(),
        None => 0,
    }
}

/// Releases a dictionary handle. Null is ignored.
///
/// # Safety
///
/// `dictionary` must be null or a live handle from
/// [`entext_dictionary_load`], and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn entext_dictionary_free(dictionary: *mut EntextDictionary) {
    if !dictionary.is_null() {
        drop(unsafe { Box::from_raw(dictionary) });
    }
}

/// Loads an n-gram language model from its saved count file.
///
/// # Safety
///
/// `path` must be null or a NUL-terminated string. `out` must point to
/// writable storage for one pointer; on success it receives a handle that
/// must be released with [`entext_lm_free`].
#[no_mangle]
pub unsafe extern "C" fn entext_lm_load(
    path: *const c_char,
    out: *mut *mut EntextLanguageModel,
) -> EntextStatus {
    guarded(|| {
        if out.is_null() {
            return fail(EntextStatus::NullArgument, "out must not be null");
        }
        let path = match unsafe { str_arg(path, "path") } {
            Ok(value) => value,
            Err(status) => return status,
        };
        match NgramModel::load(Path::new(path)) {
            Ok(model) => {
                unsafe { *out = Box::into_raw(Box::new(EntextLanguageModel { model })) };
                EntextStatus::Ok
            }
            Err(err) => fail_from(&err),
        }
    })
}

/// Returns the maximum n-gram length of a model, or 0 for null.
///
/// # Safety
///
/// `lm` must be null or a live handle from [`entext_lm_load`].
#[no_mangle]
pub unsafe extern "C" fn entext_lm_order(lm: *const EntextLanguageModel) -> usize {
    match unsafe { lm.as_ref() } {
        Some(handle) => handle.model.order(),
        None => 0,
    }
}

/// Scores a space-separated n-gram under stupid backoff, writing the log10
/// probability to `out`. Unseen n-grams yield negative infinity.
///
/// # Safety
///
/// `lm` must be a live handle from [`entext_lm_load`]. `ngram` must be null
/// or a NUL-terminated string. `out` must point to writable storage for one
/// double.
#[no_mangle]
pub unsafe extern "C" fn entext_lm_log_prob(
    lm: *const EntextLanguageModel,
    ngram: *const c_char,
    backoff_alpha: f64,
    out: *mut f64,
) -> EntextStatus {
    guarded(|| {
        if out.is_null() {
            return fail(EntextStatus::NullArgument, "out must not be null");
        }
        let handle = match unsafe { handle_arg(lm, "lm") } {
            Ok(value) => value,
            Err(status) => return status,
        };
        let ngram = match unsafe { str_arg(ngram, "ngram") } {
            Ok(value) => value,
            Err(status) => return status,
        };
        let tokens: Vec<&str> = ngram.split_whitespace().collect();
        if tokens.is_empty() {
            return fail(
                EntextStatus::Validation,
                "ngram must contain at least one token",
            );
        }
        match handle.model.log_prob(&tokens, backoff_alpha) {
            Ok(log_prob) => {
                unsafe { *out = log_prob };
                EntextStatus::Ok
            }
            Err(err) => fail_from(&err),
        }
    })
}

/// Releases a language-model handle. Null is ignored.
///
/// # Safety
///
/// `lm` must be null or a live handle from [`entext_lm_load`], and must not
/// be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn entext_lm_free(lm: *mut EntextLanguageModel) {
    if !lm.is_null() {
        drop(unsafe { Box::from_raw(lm) });
    }
}

/// Loads a word-embedding table from a text file.
///
/// # Safety
///
/// `path` must be null or a NUL-terminated string. `out` must point to
/// writable storage for one pointer; on success it receives a handle that
/// must be released with [`entext_embeddings_free`].
#[no_mangle]
pub unsafe extern "C" fn entext_embeddings_load(
    path: *const c_char,
    out: *mut *mut EntextEmbeddings,
) -> EntextStatus {
    guarded(|| {
        if out.is_null() {
            return fail(EntextStatus::NullArgument, "out must not be null");
        }
        let path = match unsafe { str_arg(path, "path") } {
            Ok(value) => value,
            Err(status) => return status,
        };
        match load_embeddings(Path::new(path)) {
            Ok(store) => {
                unsafe { *out = Box::into_raw(Box::new(EntextEmbeddings { store })) };
                EntextStatus::Ok
            }
            Err(err) => fail_from(&err),
        }
    })
}

/// Writes the cosine similarity of two words to `out`. Unknown words and
/// zero-norm vectors fail with a validation status.
///
/// # Safety
///
/// `embeddings` must be a live handle from [`entext_embeddings_load`].
/// `first` and `second` must be null or NUL-terminated strings. `out` must
/// point to writable storage for one double.
#[no_mangle]
pub unsafe extern "C" fn entext_embeddings_cosine(
    embeddings: *const EntextEmbeddings,
    first: *const c_char,
    second: *const c_char,
    out: *mut f64,
) -> EntextStatus {
    guarded(|| {
        if out.is_null() {
            return fail(EntextStatus::NullArgument, "out must not be null");
        }
        let handle = match unsafe { handle_arg(embeddings, "embeddings") } {
            Ok(value) => value,
            Err(status) => return status,
        };
        let first = match unsafe { str_arg(first, "first") } {
            Ok(value) => value,
            Err(status) => return status,
        };
        let second = match unsafe { str_arg(second, "second") } {
            Ok(value) => value,
            Err(status) => return status,
        };
        match handle.store.cosine(first, second) {
            Ok(cosine) => {
                unsafe { *out = cosine };
                EntextStatus::Ok
            }
            Err(err) => fail_from(&err),
        }
    })
}

/// Releases an embedding-table handle. Null is ignored.
///
/// # Safety
///
/// `embeddings` must be null or a live handle from
/// [`entext_embeddings_load`], and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn entext_embeddings_free(embeddings: *mut EntextEmbeddings) {
    if !embeddings.is_null() {
        drop(unsafe { Box::from_raw(embeddings) });
    }
}

/// Extracts approximate entity matches from `text`, one document per line,
/// and writes a newly allocated TSV string (header row included) to
/// `out_tsv`. Documents are numbered from 1 in input order. Pass null
/// `options` for defaults.
///
/// # Safety
///
/// `dictionary` must be a live handle from [`entext_dictionary_load`].
/// `text` must be null or a NUL-terminated string. `options` must be null or
/// point to a valid options struct. `out_tsv` must point to writable storage
/// for one pointer; on success it receives a string that must be released
/// with [`entext_string_free`].
#[no_mangle]
pub unsafe extern "C" fn entext_extract_tsv(
    dictionary: *const EntextDictionary,
    text: *const c_char,
    options: *const EntextExtractOptions,
    out_tsv: *mut *mut c_char,
) -> EntextStatus {
    guarded(|| {
        if out_tsv.is_null() {
            return fail(EntextStatus::NullArgument, "out_tsv must not be null");
        }
        let handle = match unsafe { handle_arg(dictionary, "dictionary") } {
            Ok(value) => value,
            Err(status) => return status,
        };
        let text = match unsafe { str_arg(text, "text") } {
            Ok(value) => value,
            Err(status) => return status,
        };
        let options = unsafe { options.as_ref() }
            .copied()
            .unwrap_or_else(|| entext_extract_options_default());
        if !(0.0..=1.0).contains(&options.delta) || !(0.0..=1.0).contains(&options.tau) {
            return fail(
                EntextStatus::Validation,
                "delta and tau must lie in [0, 1]",
            );
        }
        let config = ExtractConfig {
            delta: options.delta,
            tau: options.tau,
            max_span_slack: options.max_span_slack,
        };
        let mut lines = vec![MATCH_TSV_HEADER.to_string()];
        for (index, line) in text.lines().enumerate() {
            let sequence = tokenize(line, &handle.tokenizer);
            for pair in extract(
                &(index + 1).to_string(),
                &sequence,
                &handle.dictionary,
                &config,
            ) {
                let entity_text = &handle.dictionary.entities[pair.entity_id].text;
                lines.push(MatchRecord::from_pair(&pair, entity_text).to_tsv_line());
            }
        }
        emit_string(lines.join("\n"), out_tsv)
    })
}

/// Rescores extraction output. `matches_tsv` holds rows in the format
/// produced by [`entext_extract_tsv`]; a leading header row is skipped. The
/// rescored rows are written as a newly allocated TSV string (header row
/// included) to `out_tsv`. Pass null `options` for defaults.
///
/// # Safety
///
/// `lm` and `embeddings` must be live handles from [`entext_lm_load`] and
/// [`entext_embeddings_load`]. `matches_tsv` must be null or a
/// NUL-terminated string. `options` must be null or point to a valid options
/// struct. `out_tsv` must point to writable storage for one pointer; on
/// success it receives a string that must be released with
/// [`entext_string_free`].
#[no_mangle]
pub unsafe extern "C" fn entext_postprocess_tsv(
    lm: *const EntextLanguageModel,
    embeddings: *const EntextEmbeddings,
    matches_tsv: *const c_char,
    options: *const EntextRescoreOptions,
    out_tsv: *mut *mut c_char,
) -> EntextStatus {
    guarded(|| {
        if out_tsv.is_null() {
            return fail(EntextStatus::NullArgument, "out_tsv must not be null");
        }
        let lm = match unsafe { handle_arg(lm, "lm") } {
            Ok(value) => value,
            Err(status) => return status,
        };
        let embeddings = match unsafe { handle_arg(embeddings, "embeddings") } {
            Ok(value) => value,
            Err(status) => return status,
        };
        let matches_tsv = match unsafe { str_arg(matches_tsv, "matches_tsv") } {
            Ok(value) => value,
            Err(status) => return status,
        };
        let options = unsafe { options.as_ref() }
            .copied()
            .unwrap_or_else(|| entext_rescore_options_default());

        let mut records = Vec::new();
        for (index, line) in matches_tsv.lines().enumerate() {
            if index == 0 && line.starts_with("doc_id\t") {
                continue;
            }
            if line.is_empty() {
                continue;
            }
            match MatchRecord::parse_tsv_line(line) {
                Ok(record) => records.push(record),
                Err(message) => {
                    return fail(
                        EntextStatus::Validation,
                        &format!("matches_tsv row {}: {}", index + 1, message),
                    )
                }
            }
        }

        let tokenizer = TokenizerConfig {
            strip_trailing_period: options.strip_trailing_period,
            ..TokenizerConfig::default()
        };
        let config = RescoreConfig {
            base: options.base,
            thresholds: ValidityThresholds {
                logprob_min: options.logprob_threshold,
                count_min: options.count_threshold,
                backoff_alpha: options.backoff_alpha,
            },
            strip_period_fix: options.strip_period_fix,
            tau: options.tau,
        };
        match postprocess_records(&records, &lm.model, &embeddings.store, &config, &tokenizer) {
            Ok(rescored) => {
                let mut lines = vec![RESCORED_TSV_HEADER.to_string()];
                lines.extend(rescored.iter().map(|row| row.to_tsv_line()));
                emit_string(lines.join("\n"), out_tsv)
            }
            Err(err) => fail_from(&err),
        }
    })
}
