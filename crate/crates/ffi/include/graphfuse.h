#ifndef GRAPHFUSE_H
#define GRAPHFUSE_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum GfStatus {
  GF_STATUS_OK = 0,
  GF_STATUS_NULL_POINTER = 1,
  GF_STATUS_INVALID_UTF8 = 2,
  GF_STATUS_PARSE = 3,
  GF_STATUS_INVALID_PARAMETER = 4,
  GF_STATUS_INVALID_GRAPH = 5,
  GF_STATUS_ODD_CYCLE = 6,
  GF_STATUS_SETTING_MISMATCH = 7,
  GF_STATUS_SIMULATION = 8,
  GF_STATUS_PANIC = 9,
} GfStatus;

/**
 * Backend selector for [`gf_run`].
 */
typedef enum GfBackend {
  GF_BACKEND_AUTO = 0,
  GF_BACKEND_DENSE = 1,
  GF_BACKEND_TABLEAU = 2,
} GfBackend;

/**
 * Opaque protocol program.
 */
typedef struct GfProgram GfProgram;

/**
 * Opaque result of one protocol execution, including the final state.
 */
typedef struct GfRun GfRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy of the last error message on this thread, or NULL if none.
 * Free with [`gf_string_free`].
 */
char *gf_last_error_message(void);

/**
 * Release a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void gf_string_free(char *s);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gf_version(void);

/**
 * Load a built-in protocol (`bell`, `box`, `pentagon`, `hexagon`, `tree`).
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum GfStatus gf_program_builtin(const char *name, struct GfProgram **out);

/**
 * Parse a program from its text form.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum GfStatus gf_program_from_text(const char *text, struct GfProgram **out);

/**
 * Text form of a program. Free the string with [`gf_string_free`].
 *
 * # Safety
 * `program` must be a live handle; `out` must be writable.
 */
enum GfStatus gf_program_to_text(const struct GfProgram *program, char **out);

/**
 * # Safety
 * `program` must be NULL or a handle that has not been freed.
 */
void gf_program_free(struct GfProgram *program);

/**
 * Execute a program. With `post_select` set every fusion is forced to succeed.
 *
 * # Safety
 * `program` must be a live handle; `out` must be writable.
 */
enum GfStatus gf_run(const struct GfProgram *program,
                     enum GfBackend backend,
                     bool post_select,
                     uint64_t seed,
                     struct GfRun **out);

/**
 * # Safety
 * `run` must be NULL or a handle that has not been freed.
 */
void gf_run_free(struct GfRun *run);

/**
 * Whether every fusion heralded success.
 *
 * # Safety
 * `run` must be a live handle.
 */
bool gf_run_success(const struct GfRun *run);

/**
 * Number of qubits in the final register, 0 for NULL.
 *
 * # Safety
 * `run` must be NULL or a live handle.
 */
uintptr_t gf_run_num_qubits(const struct GfRun *run);

/**
 * Probability of the recorded herald outcomes.
 *
 * # Safety
 * `run` must be a live handle; `out` must be writable.
 */
enum GfStatus gf_run_probability(const struct GfRun *run, double *out);

/**
 * Exact expectation of a Pauli string such as `"+XZZI"` on the final state.
 *
 * # Safety
 * `run` must be a live handle, `pauli` a NUL-terminated string and `out` writable.
 */
enum GfStatus gf_run_expectation(const struct GfRun *run, const char *pauli, double *out);

/**
 * Exact witness quantities `G_a`, `G_b` and `P = G_a + G_b - 1` of the final state
 * against the program's expected graph.
 *
 * # Safety
 * Handles must be live and every out pointer writable.
 */
enum GfStatus gf_run_witness(const struct GfRun *run,
                             const struct GfProgram *program,
                             double *g_a,
                             double *g_b,
                             double *p);

/**
 * Herald-conditioned Bell fidelity under per-emission depolarizing probability `p`.
 *
 * # Safety
 * `out` must be writable.
 */
enum GfStatus gf_bell_fidelity(double p, double *out);

/**
 * Depolarizing probability at which the Bell fidelity equals `target`.
 *
 * # Safety
 * `out` must be writable.
 */
enum GfStatus gf_calibrate_bell(double target, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRAPHFUSE_H */
