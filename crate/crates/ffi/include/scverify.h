#ifndef SCVERIFY_H
#define SCVERIFY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ScStatus {
  SC_STATUS_OK = 0,
  SC_STATUS_NULL_ARGUMENT = 1,
  SC_STATUS_INVALID_UTF8 = 2,
  SC_STATUS_PARSE_ERROR = 3,
  SC_STATUS_MODEL_ERROR = 4,
  SC_STATUS_PANIC = 5,
} ScStatus;

typedef enum ScEvalKind {
  SC_EVAL_KIND_VALUE = 0,
  SC_EVAL_KIND_BOTTOM = 1,
  SC_EVAL_KIND_EXHAUSTED = 2,
} ScEvalKind;

typedef enum ScVerdictKind {
  SC_VERDICT_KIND_SAFE = 0,
  SC_VERDICT_KIND_NOT_SHOWN_SAFE = 1,
  SC_VERDICT_KIND_BUDGET_EXHAUSTED = 2,
} ScVerdictKind;

/**
 * A parsed program.
 */
typedef struct ScProgram ScProgram;

/**
 * The outcome of one verification.
 */
typedef struct ScVerdict ScVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread. Valid until the next
 * call into this library on the same thread.
 */
const char *sc_last_error_message(void);

/**
 * # Safety
 * `source` must be a nul-terminated string and `out` a valid pointer.
 */
enum ScStatus sc_program_parse(const char *source, struct ScProgram **out);

/**
 * # Safety
 * `p` must be null or come from [`sc_program_parse`], and not be used
 * afterwards.
 */
void sc_program_free(struct ScProgram *p);

/**
 * Evaluates `entry(data)`. `budget` bounds rule applications, 0 for
 * none. The rendered value, or the reason for ⊥, is stored in
 * `*result` and must be released with [`sc_string_free`].
 *
 * # Safety
 * Pointers must be valid; strings nul-terminated.
 */
enum ScStatus sc_eval(const struct ScProgram *p,
                      const char *entry,
                      const char *data,
                      uint64_t budget,
                      enum ScEvalKind *kind,
                      char **result);

/**
 * Verifies that `entry` never returns `False`. `rounds` of 0 runs one
 * round and a second only when `False` survives; `max_nodes` of 0 keeps
 * the default budget.
 *
 * # Safety
 * Pointers must be valid; `entry` nul-terminated.
 */
enum ScStatus sc_verify(const struct ScProgram *p,
                        const char *entry,
                        bool via_interpreter,
                        uint32_t rounds,
                        uintptr_t max_nodes,
                        struct ScVerdict **out);

/**
 * # Safety
 * `v` must come from [`sc_verify`].
 */
enum ScVerdictKind sc_verdict_kind(const struct ScVerdict *v);

/**
 * The residual program as source text, or null when the budget ran out.
 * Release with [`sc_string_free`].
 *
 * # Safety
 * `v` must come from [`sc_verify`].
 */
char *sc_verdict_residual(const struct ScVerdict *v);

/**
 * Machine-readable summary as JSON. Release with [`sc_string_free`].
 *
 * # Safety
 * `v` must come from [`sc_verify`].
 */
char *sc_verdict_summary_json(const struct ScVerdict *v);

/**
 * # Safety
 * `v` must be null or come from [`sc_verify`], and not be used afterwards.
 */
void sc_verdict_free(struct ScVerdict *v);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void sc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCVERIFY_H */
