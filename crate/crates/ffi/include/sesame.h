#ifndef SESAME_H
#define SESAME_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SesameStatus {
  SESAME_STATUS_OK = 0,
  SESAME_STATUS_NULL_ARGUMENT = 1,
  SESAME_STATUS_INVALID_UTF8 = 2,
  SESAME_STATUS_SYNTAX = 3,
  SESAME_STATUS_IMPROPER = 4,
  SESAME_STATUS_CLASH = 5,
  SESAME_STATUS_STEP_LIMIT = 6,
  SESAME_STATUS_OPEN_TERM = 7,
  SESAME_STATUS_UNKNOWN_FAMILY = 8,
  SESAME_STATUS_INTERNAL = 9,
  SESAME_STATUS_PANIC = 10,
} SesameStatus;

typedef enum SesameMachine {
  /**
   * The strong machine; accepts open terms.
   */
  SESAME_MACHINE_SESAME = 0,
  /**
   * The basic machine; closed terms only.
   */
  SESAME_MACHINE_BAM = 1,
} SesameMachine;

typedef enum SesameOracleMode {
  SESAME_ORACLE_MODE_GOOD_FULL = 0,
  SESAME_ORACLE_MODE_GOOD_NON_ERASING = 1,
  SESAME_ORACLE_MODE_BASIC_NON_ERASING = 2,
} SesameOracleMode;

/**
 * Opaque handle on a finished machine run.
 */
typedef struct SesameRun SesameRun;

/**
 * Opaque term handle.
 */
typedef struct SesameTerm SesameTerm;

/**
 * Transition counts of a finished run.
 */
typedef struct SesameMetrics {
  uint64_t transitions;
  uint64_t principal;
  uint64_t search;
  uint64_t multiplicative;
  uint64_t exponential;
  uint64_t initial_size;
  uint64_t max_copied_value_size;
  uint64_t elapsed_ns;
} SesameMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next call into the library on the same thread.
 */
const char *sesame_last_error(void);

/**
 * Parses an ASCII or Unicode term.
 *
 * # Safety
 * `src` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SesameStatus sesame_term_parse(const char *src, struct SesameTerm **out);

/**
 * Builds a member of a term family, e.g. `sigma:3` or `cutpi:3,4`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SesameStatus sesame_term_family(const char *spec, struct SesameTerm **out);

/**
 * # Safety
 * `term` must come from this library and not be used afterwards; null is
 * ignored.
 */
void sesame_term_free(struct SesameTerm *term);

/**
 * Prints a term; release the string with [`sesame_string_free`]. Null on a
 * null handle.
 *
 * # Safety
 * `term` must be null or a live handle.
 */
char *sesame_term_to_string(const struct SesameTerm *term, bool unicode);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards; null is
 * ignored.
 */
void sesame_string_free(char *s);

/**
 * Node count of a term; 0 on a null handle.
 *
 * # Safety
 * `term` must be null or a live handle.
 */
uint64_t sesame_term_size(const struct SesameTerm *term);

/**
 * # Safety
 * `term` must be null or a live handle.
 */
bool sesame_term_is_typable(const struct SesameTerm *term);

/**
 * Equality up to renaming of bound variables.
 *
 * # Safety
 * Both handles must be null or live.
 */
bool sesame_term_alpha_eq(const struct SesameTerm *a, const struct SesameTerm *b);

/**
 * Removes every cut of a term, as done at the end of a strong run.
 *
 * # Safety
 * `term` must be a live handle and `out` a valid pointer.
 */
enum SesameStatus sesame_term_gc(const struct SesameTerm *term, struct SesameTerm **out);

/**
 * Runs a machine to its final state.
 *
 * # Safety
 * `term` must be a live handle and `out` a valid pointer.
 */
enum SesameStatus sesame_run(const struct SesameTerm *term,
                             enum SesameMachine machine,
                             uint64_t step_limit,
                             struct SesameRun **out);

/**
 * # Safety
 * `run` must come from this library and not be used afterwards; null is
 * ignored.
 */
void sesame_run_free(struct SesameRun *run);

/**
 * Fills `out` with the counts of a run.
 *
 * # Safety
 * `run` must be a live handle and `out` a valid pointer.
 */
enum SesameStatus sesame_run_metrics(const struct SesameRun *run, struct SesameMetrics *out);

/**
 * The result of a run: garbage collected for the strong machine, the answer
 * as is for the basic one. A new handle the caller owns.
 *
 * # Safety
 * `run` must be a live handle and `out` a valid pointer.
 */
enum SesameStatus sesame_run_result(const struct SesameRun *run, struct SesameTerm **out);

/**
 * The read-back of the final state, before garbage collection.
 *
 * # Safety
 * `run` must be a live handle and `out` a valid pointer.
 */
enum SesameStatus sesame_run_readback(const struct SesameRun *run, struct SesameTerm **out);

/**
 * Normalizes with the rewriting oracle, leftmost first. `steps` may be
 * null.
 *
 * # Safety
 * `term` must be a live handle, `out` a valid pointer and `steps` null or
 * valid.
 */
enum SesameStatus sesame_normalize(const struct SesameTerm *term,
                                   enum SesameOracleMode mode,
                                   uint64_t step_limit,
                                   struct SesameTerm **out,
                                   uint64_t *steps);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SESAME_H */
