#ifndef RSLD_H
#define RSLD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RsldStatus {
  RSLD_STATUS_OK = 0,
  RSLD_STATUS_NULL_ARGUMENT = 1,
  RSLD_STATUS_INVALID_UTF8 = 2,
  RSLD_STATUS_PARSE_ERROR = 3,
  RSLD_STATUS_INVALID_OPTION = 4,
  RSLD_STATUS_ENGINE_ERROR = 5,
  RSLD_STATUS_PANIC = 6,
} RsldStatus;

// Outcome of a derivation; values match the command-line exit codes.
typedef enum RsldOutcome {
  RSLD_OUTCOME_REFUTED = 0,
  RSLD_OUTCOME_FAILED = 1,
  RSLD_OUTCOME_BOUND_EXCEEDED = 2,
  RSLD_OUTCOME_PRUNED = 3,
} RsldOutcome;

// A finished derivation.
typedef struct RsldDerivation RsldDerivation;

// A parsed program.
typedef struct RsldProgram RsldProgram;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until
// the next call on the same thread.
const char *rsld_last_error(void);

// Static version string.
const char *rsld_version(void);

// # Safety
// `s` must be null or a string returned by this library.
void rsld_string_free(char *s);

// Parses program text.
//
// # Safety
// `text` must be a nul-terminated string; `out` must be writable.
enum RsldStatus rsld_program_parse(const char *text, struct RsldProgram **out);

// Number of clauses.
//
// # Safety
// `program` must be null or a live handle.
size_t rsld_program_len(const struct RsldProgram *program);

// # Safety
// `program` must be null or a handle not yet freed.
void rsld_program_free(struct RsldProgram *program);

// Runs one derivation. `mode`, `rule` and `loop_check` take the
// command-line spellings; null selects `rsld`, `stack` and `off`.
//
// # Safety
// Pointers must be valid as described; `out` must be writable.
enum RsldStatus rsld_derive(const struct RsldProgram *program,
                            const char *goal,
                            const char *mode,
                            const char *rule,
                            const char *loop_check,
                            size_t max_steps,
                            bool advancement,
                            struct RsldDerivation **out);

// # Safety
// `d` must be a live handle.
enum RsldOutcome rsld_derivation_outcome(const struct RsldDerivation *d);

// Number of resolution steps.
//
// # Safety
// `d` must be null or a live handle.
size_t rsld_derivation_len(const struct RsldDerivation *d);

// Length of the reduced resolvent at stage `stage`, or -1 when out of range.
//
// # Safety
// `d` must be null or a live handle.
int64_t rsld_derivation_reduced_len(const struct RsldDerivation *d, size_t stage);

// The trace as JSON (`json` true) or text.
//
// # Safety
// `d` must be a live handle; `out` must be writable.
enum RsldStatus rsld_derivation_trace(const struct RsldDerivation *d, bool json, char **out);

// # Safety
// `d` must be null or a handle not yet freed.
void rsld_derivation_free(struct RsldDerivation *d);

// Reduces a list goal, protecting the comma-separated variables in
// `protect` (may be null). Writes the reduced goal.
//
// # Safety
// Strings must be nul-terminated; `out` must be writable.
enum RsldStatus rsld_reduce(const char *goal, const char *protect, bool exhaustive, char **out);

// Runs the specialisation-independence suite; writes 1 to `passed` when
// no trial failed.
//
// # Safety
// `rule` must be nul-terminated; `passed` must be writable.
enum RsldStatus rsld_check_spec_independence(const char *rule,
                                             uint64_t trials,
                                             uint64_t seed,
                                             int32_t *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RSLD_H */
