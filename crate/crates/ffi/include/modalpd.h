#ifndef MODALPD_H
#define MODALPD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes.
 */
typedef enum MpStatus {
  MP_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  MP_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  MP_STATUS_INVALID_UTF8 = 2,
  /**
   * Syntax or validation error in an agent file, formula or payoff list.
   */
  MP_STATUS_INVALID_INPUT = 3,
  /**
   * An agent name did not resolve.
   */
  MP_STATUS_UNKNOWN_AGENT = 4,
  /**
   * The two agents cannot be played against each other.
   */
  MP_STATUS_UNSUPPORTED = 5,
  /**
   * A bug: solver invariant violated or a panic was caught.
   */
  MP_STATUS_INTERNAL = 6,
} MpStatus;

typedef enum MpAction {
  MP_ACTION_COOPERATE = 0,
  MP_ACTION_DEFECT = 1,
} MpAction;

/**
 * Opaque agent table.
 */
typedef struct MpTable MpTable;

/**
 * Outcome of one match. Proof levels are -1 for syntactic agents.
 * Payoffs are exact fractions.
 */
typedef struct MpMatch {
  enum MpAction action_x;
  enum MpAction action_y;
  int64_t proof_level_x;
  int64_t proof_level_y;
  int64_t payoff_x_num;
  int64_t payoff_x_den;
  int64_t payoff_y_num;
  int64_t payoff_y_den;
} MpMatch;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty if none. The
 * pointer stays valid until the next failing call on this thread.
 */
const char *mp_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mp_version(void);

/**
 * New table holding the builtin agents.
 *
 * # Safety
 * `out` must be null or point to writable storage for a pointer.
 */
enum MpStatus mp_table_builtin(struct MpTable **out);

/**
 * Parses an agent file on top of the builtin agents.
 *
 * # Safety
 * `text` must be null or a NUL-terminated string; `out` as for
 * [`mp_table_builtin`].
 */
enum MpStatus mp_table_parse(const char *text, struct MpTable **out);

/**
 * # Safety
 * `table` must be null or a pointer returned by this library and not yet freed.
 */
void mp_table_free(struct MpTable *table);

/**
 * Plays `x` against `y`. `payoffs` is `"T,R,P,S"`, or null for 5,3,1,0.
 *
 * # Safety
 * String arguments must be null or NUL-terminated; `table` as for
 * [`mp_table_free`]; `out` must be null or writable.
 */
enum MpStatus mp_play(const struct MpTable *table,
                      const char *x,
                      const char *y,
                      const char *payoffs,
                      struct MpMatch *out);

/**
 * Plays `x` against `y` and writes the JSON report (schema "1") to `out`.
 *
 * # Safety
 * As for [`mp_play`]; `out` receives a string to free with [`mp_string_free`].
 */
enum MpStatus mp_play_json(const struct MpTable *table,
                           const char *x,
                           const char *y,
                           const char *payoffs,
                           char **out);

/**
 * Round robin over the comma-separated `roster`; writes the JSON report.
 *
 * # Safety
 * As for [`mp_play_json`].
 */
enum MpStatus mp_tournament_json(const struct MpTable *table,
                                 const char *roster,
                                 const char *payoffs,
                                 char **out);

/**
 * Parses a formula and writes its canonical ASCII rendering.
 *
 * # Safety
 * As for [`mp_play_json`].
 */
enum MpStatus mp_formula_canonical(const char *text, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void mp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MODALPD_H */
