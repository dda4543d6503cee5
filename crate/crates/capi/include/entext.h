/* C interface to the entext extraction pipeline. Generated; edit the Rust definitions instead. */

#ifndef ENTEXT_H
#define ENTEXT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code for every fallible call in this interface.
 */
typedef enum EntextStatus {
  /**
   * The call succeeded.
   */
  ENTEXT_STATUS_OK = 0,
  /**
   * Invalid input: bad parameter value, malformed data, or an
   * out-of-vocabulary lookup.
   */
  ENTEXT_STATUS_VALIDATION = 1,
  /**
   * The underlying file could not be read or written.
   */
  ENTEXT_STATUS_IO = 2,
  /**
   * A required pointer argument was null.
   */
  ENTEXT_STATUS_NULL_ARGUMENT = 3,
  /**
   * A string argument was not valid UTF-8.
   */
  ENTEXT_STATUS_INVALID_UTF8 = 4,
  /**
   * An unexpected internal failure; report this as a bug.
   */
  ENTEXT_STATUS_INTERNAL = 5,
} EntextStatus;

/**
 * Opaque handle to a loaded dictionary plus the tokenizer settings it was
 * loaded with.
 */
typedef struct EntextDictionary EntextDictionary;

/**
 * Opaque handle to a loaded word-embedding table.
 */
typedef struct EntextEmbeddings EntextEmbeddings;

/**
 * Opaque handle to a loaded n-gram language model.
 */
typedef struct EntextLanguageModel EntextLanguageModel;

/**
 * Knobs for [`entext_extract_tsv`]. Obtain defaults from
 * [`entext_extract_options_default`] and override selectively.
 */
typedef struct EntextExtractOptions {
  /**
   * Token-level score threshold in [0, 1]; pairs scoring below it are dropped.
   */
  double delta;
  /**
   * Character-level similarity threshold in [0, 1] gating substitutions.
   */
  double tau;
  /**
   * Extra tokens a candidate window may have beyond the entity length.
   */
  uintptr_t max_span_slack;
} EntextExtractOptions;

/**
 * Knobs for [`entext_postprocess_tsv`]. Obtain defaults from
 * [`entext_rescore_options_default`] and override selectively.
 */
typedef struct EntextRescoreOptions {
  /**
   * Base of the exponential distance normalization; must exceed 1.
   */
  double base;
  /**
   * Minimum log10 probability (exclusive) for an n-gram to count as attested.
   */
  double logprob_threshold;
  /**
   * Minimum raw count (exclusive) for an n-gram to count as attested.
   */
  uint64_t count_threshold;
  /**
   * Stupid-backoff multiplier per dropped context word.
   */
  double backoff_alpha;
  /**
   * Repair pairs that differ only by trailing periods.
   */
  bool strip_period_fix;
  /**
   * Character-level similarity threshold in [0, 1], reused from extraction.
   */
  double tau;
  /**
   * Strip trailing periods when re-tokenizing entity text.
   */
  bool strip_trailing_period;
} EntextRescoreOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the crate version as a static NUL-terminated string. Never free
 * this pointer.
 */
const char *entext_version(void);

/**
 * Returns the message recorded by the most recent failing call on this
 * thread, or null if no call has failed yet. The pointer stays valid until
 * the next failing call on the same thread; do not free it.
 */
const char *entext_last_error_message(void);

/**
 * Releases a string returned by this interface. Null is ignored.
 *
 * # Safety
 *
 * `s` must be null or a pointer previously returned through an `out`
 * parameter of this interface, and must not be used afterwards.
 */
void entext_string_free(char *s);

/**
 * Returns the default extraction options.
 */
struct EntextExtractOptions entext_extract_options_default(void);

/**
 * Returns the default rescoring options.
 */
struct EntextRescoreOptions entext_rescore_options_default(void);

/**
 * Loads a dictionary from a text file, one entity per line. Tokens are
 * lowercased; `strip_trailing_period` additionally removes one trailing `.`
 * from multi-character tokens.
 *
 * # Safety
 *
 * `path` must be null or a NUL-terminated string. `out` must point to
 * writable storage for one pointer; on success it receives a handle that
 * must be released with [`entext_dictionary_free`].
 */
enum EntextStatus entext_dictionary_load(const char *path,
                                         bool strip_trailing_period,
                                         struct EntextDictionary **out);

/**
 * Returns the number of entities in a dictionary, or 0 for null.
 *
 * # Safety
 *
 * `dictionary` must be null or a live handle from
 * [`entext_dictionary_load`].
 */
uintptr_t entext_dictionary_entity_count(const struct EntextDictionary *dictionary);

/**
 * Releases a dictionary handle. Null is ignored.
 *
 * # Safety
 *
 * `dictionary` must be null or a live handle from
 * [`entext_dictionary_load`], and must not be used afterwards.
 */
void entext_dictionary_free(struct EntextDictionary *dictionary);

/**
 * Loads an n-gram language model from its saved count file.
 *
 * # Safety
 *
 * `path` must be null or a NUL-terminated string. `out` must point to
 * writable storage for one pointer; on success it receives a handle that
 * must be released with [`entext_lm_free`].
 */
enum EntextStatus entext_lm_load(const char *path, struct EntextLanguageModel **out);

/**
 * Returns the maximum n-gram length of a model, or 0 for null.
 *
 * # Safety
 *
 * `lm` must be null or a live handle from [`entext_lm_load`].
 */
uintptr_t entext_lm_order(const struct EntextLanguageModel *lm);

/**
 * Scores a space-separated n-gram under stupid backoff, writing the log10
 * probability to `out`. Unseen n-grams yield negative infinity.
 *
 * # Safety
 *
 * `lm` must be a live handle from [`entext_lm_load`]. `ngram` must be null
 * or a NUL-terminated string. `out` must point to writable storage for one
 * double.
 */
enum EntextStatus entext_lm_log_prob(const struct EntextLanguageModel *lm,
                                     const char *ngram,
                                     double backoff_alpha,
                                     double *out);

/**
 * Releases a language-model handle. Null is ignored.
 *
 * # Safety
 *
 * `lm` must be null or a live handle from [`entext_lm_load`], and must not
 * be used afterwards.
 */
void entext_lm_free(struct EntextLanguageModel *lm);

/**
 * Loads a word-embedding table from a text file.
 *
 * # Safety
 *
 * `path` must be null or a NUL-terminated string. `out` must point to
 * writable storage for one pointer; on success it receives a handle that
 * must be released with [`entext_embeddings_free`].
 */
enum EntextStatus entext_embeddings_load(const char *path, struct EntextEmbeddings **out);

/**
 * Writes the cosine similarity of two words to `out`. Unknown words and
 * zero-norm vectors fail with a validation status.
 *
 * # Safety
 *
 * `embeddings` must be a live handle from [`entext_embeddings_load`].
 * `first` and `second` must be null or NUL-terminated strings. `out` must
 * point to writable storage for one double.
 */
enum EntextStatus entext_embeddings_cosine(const struct EntextEmbeddings *embeddings,
                                           const char *first,
                                           const char *second,
                                           double *out);

/**
 * Releases an embedding-table handle. Null is ignored.
 *
 * # Safety
 *
 * `embeddings` must be null or a live handle from
 * [`entext_embeddings_load`], and must not be used afterwards.
 */
void entext_embeddings_free(struct EntextEmbeddings *embeddings);

/**
 * Extracts approximate entity matches from `text`, one document per line,
 * and writes a newly allocated TSV string (header row included) to
 * `out_tsv`. Documents are numbered from 1 in input order. Pass null
 * `options` for defaults.
 *
 * # Safety
 *
 * `dictionary` must be a live handle from [`entext_dictionary_load`].
 * `text` must be null or a NUL-terminated string. `options` must be null or
 * point to a valid options struct. `out_tsv` must point to writable storage
 * for one pointer; on success it receives a string that must be released
 * with [`entext_string_free`].
 */
enum EntextStatus entext_extract_tsv(const struct EntextDictionary *dictionary,
                                     const char *text,
                                     const struct EntextExtractOptions *options,
                                     char **out_tsv);

/**
 * Rescores extraction output. `matches_tsv` holds rows in the format
 * produced by [`entext_extract_tsv`]; a leading header row is skipped. The
 * rescored rows are written as a newly allocated TSV string (header row
 * included) to `out_tsv`. Pass null `options` for defaults.
 *
 * # Safety
 *
 * `lm` and `embeddings` must be live handles from [`entext_lm_load`] and
 * [`entext_embeddings_load`]. `matches_tsv` must be null or a
 * NUL-terminated string. `options` must be null or point to a valid options
 * struct. `out_tsv` must point to writable storage for one pointer; on
 * success it receives a string that must be released with
 * [`entext_string_free`].
 */
enum EntextStatus entext_postprocess_tsv(const struct EntextLanguageModel *lm,
                                         const struct EntextEmbeddings *embeddings,
                                         const char *matches_tsv,
                                         const struct EntextRescoreOptions *options,
                                         char **out_tsv);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* ENTEXT_H */
