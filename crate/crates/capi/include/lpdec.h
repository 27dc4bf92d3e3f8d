/* C interface to the exact LP decoding workbench. */

#ifndef LPDEC_H
#define LPDEC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum LpdecStatus {
  LPDEC_STATUS_OK = 0,
  /**
   * A pointer argument was NULL.
   */
  LPDEC_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  LPDEC_STATUS_BAD_UTF8 = 2,
  /**
   * The library rejected the inputs; see lpdec_last_error().
   */
  LPDEC_STATUS_ERROR = 3,
  /**
   * An internal invariant breached; see lpdec_last_error().
   */
  LPDEC_STATUS_PANIC = 4,
} LpdecStatus;

/**
 * Opaque Tanner graph handle.
 */
typedef struct LpdecGraph LpdecGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread. Never NULL.
 */
const char *lpdec_last_error(void);

/**
 * Parse a graph from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be a valid
 * pointer.
 */
enum LpdecStatus lpdec_graph_from_json(const char *json, struct LpdecGraph **out);

/**
 * Sample a (d_v, d_c)-regular code on n variables.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum LpdecStatus lpdec_graph_build_regular(uintptr_t d_v,
                                           uintptr_t d_c,
                                           uintptr_t n,
                                           uint64_t seed,
                                           struct LpdecGraph **out);

/**
 * Serialize a graph to JSON; release the string with
 * lpdec_string_free().
 *
 * # Safety
 * `graph` must come from this library; `out` must be a valid pointer.
 */
enum LpdecStatus lpdec_graph_to_json(const struct LpdecGraph *graph, char **out);

/**
 * Number of variable nodes, or -1 for a NULL handle.
 *
 * # Safety
 * `graph` must come from this library or be NULL.
 */
int64_t lpdec_graph_n_vars(const struct LpdecGraph *graph);

/**
 * Number of check nodes, or -1 for a NULL handle.
 *
 * # Safety
 * `graph` must come from this library or be NULL.
 */
int64_t lpdec_graph_n_checks(const struct LpdecGraph *graph);

/**
 * Release a graph handle. NULL is a no-op.
 *
 * # Safety
 * `graph` must come from this library and not be freed twice.
 */
void lpdec_graph_free(struct LpdecGraph *graph);

/**
 * Decode one error pattern. On success, `*success_out` reports whether
 * the all-zero codeword is the unique optimum and `*value_out` holds
 * the optimal cost as "p/q".
 *
 * # Safety
 * Pointer arguments must be valid; `bits` must hold `len` bytes.
 */
enum LpdecStatus lpdec_decode(const struct LpdecGraph *graph,
                              const uint8_t *bits,
                              uintptr_t len,
                              bool *success_out,
                              char **value_out);

/**
 * Decode and cross-check against the certificate search. `*json_out`
 * receives {"success": bool, "margin": "p/q", "alpha_max": "p/q"} where
 * margin is the best uniform certificate slack and alpha_max the
 * largest weight in the flow view of the certificate (0 when none
 * exists).
 *
 * # Safety
 * Pointer arguments must be valid; `bits` must hold `len` bytes.
 */
enum LpdecStatus lpdec_analyze(const struct LpdecGraph *graph,
                               const uint8_t *bits,
                               uintptr_t len,
                               char **json_out);

/**
 * Release a string returned by this library. NULL is a no-op.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void lpdec_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LPDEC_H */
