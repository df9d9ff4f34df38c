#ifndef TRACHTENBERG_H
#define TRACHTENBERG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum TbStatus {
  TB_STATUS_OK = 0,
  TB_STATUS_NULL_POINTER = 1,
  TB_STATUS_INVALID_UTF8 = 2,
  TB_STATUS_PARSE_ERROR = 3,
  TB_STATUS_UNSUPPORTED_MULTIPLIER = 4,
  TB_STATUS_DOMAIN_ERROR = 5,
  TB_STATUS_CONFIG_ERROR = 6,
  TB_STATUS_NOT_FOUND = 7,
  TB_STATUS_CHALLENGE_ERROR = 8,
  TB_STATUS_VALIDATION_ERROR = 9,
  TB_STATUS_PERSISTENCE_ERROR = 10,
  TB_STATUS_IO_ERROR = 11,
  TB_STATUS_SESSION_FINISHED = 12,
  TB_STATUS_PANIC = 13,
} TbStatus;

typedef enum TbRole {
  TB_ROLE_RIGHTMOST = 0,
  TB_ROLE_INTERIOR = 1,
  TB_ROLE_LEADING = 2,
} TbRole;

typedef enum TbVerdict {
  TB_VERDICT_CORRECT = 0,
  TB_VERDICT_INCORRECT = 1,
} TbVerdict;

typedef struct TbSession TbSession;

typedef struct TbTrace TbTrace;

/*
 One position of a trace, positions counted from the right.
 */
typedef struct TbStep {
  size_t position_index;
  enum TbRole role;
  uint8_t digit;
  uint8_t neighbour;
  int32_t raw_value;
  uint8_t carry_in;
  int32_t sum;
  uint8_t result_digit;
  uint8_t carry_out;
} TbStep;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message describing the most recent failure on this thread, or NULL if
 the last call succeeded. Valid until the next call into this library
 from the same thread.
 */
const char *tb_last_error_message(void);

/*
 Library version as a static string.
 */
const char *tb_version(void);

/*
 Releases a string produced by this library. NULL is ignored.
 */
void tb_string_free(char *s);

/*
 Multiplies a decimal digit string by `m` with the position rules.
 */
enum TbStatus tb_multiply(const char *digits, uint32_t m, char **out_product);

/*
 Multiplies by `m` in 0..=12 with ordinary long multiplication.
 */
enum TbStatus tb_reference_multiply(const char *digits, uint32_t m, char **out_product);

/*
 Computes the full per-position trace of `digits × m`.
 */
enum TbStatus tb_trace_new(const char *digits, uint32_t m, struct TbTrace **out_trace);

void tb_trace_free(struct TbTrace *trace);

/*
 Product as a borrowed string, or NULL for a NULL handle.
 */
const char *tb_trace_product(const struct TbTrace *trace);

/*
 Number of positions, including the leading zero position.
 */
size_t tb_trace_step_count(const struct TbTrace *trace);

/*
 The final carry written as an extra leading digit, or -1 if there is
 none.
 */
int32_t tb_trace_extra_leading_digit(const struct TbTrace *trace);

enum TbStatus tb_trace_step(const struct TbTrace *trace, size_t index, struct TbStep *out_step);

/*
 Worked formula of one position, e.g. `9+3+5=(1)7`.
 */
enum TbStatus tb_trace_step_formula(const struct TbTrace *trace, size_t index, char **out_formula);

/*
 Four-row text table of the computation.
 */
enum TbStatus tb_trace_render_table(const struct TbTrace *trace, char **out_text);

/*
 Structured trace as a JSON document.
 */
enum TbStatus tb_trace_to_json(const struct TbTrace *trace, char **out_json);

/*
 Starts an in-memory drill session from a JSON config, for example
 `{"multipliers":[6,11],"min_digits":2,"max_digits":4,"mode":"guided_steps","seed":1,"problem_count":5}`.
 */
enum TbStatus tb_session_new(const char *config_json,
                             struct TbSession **out_session);

/*
 Loads a session from `<store_dir>/<session_id>.log`.
 */
enum TbStatus tb_session_load(const char *store_dir,
                              const char *session_id,
                              struct TbSession **out_session);

/*
 Appends the session's unsaved events to `<store_dir>/<session_id>.log`.
 */
enum TbStatus tb_session_save(struct TbSession *session, const char *store_dir);

void tb_session_free(struct TbSession *session);

/*
 Session id as a borrowed string, or NULL for a NULL handle.
 */
const char *tb_session_id(const struct TbSession *session);

/*
 Writes the open challenge as JSON. Returns `TB_SESSION_FINISHED` and
 leaves `out_json` untouched once every problem has been answered.
 */
enum TbStatus tb_session_next(struct TbSession *session, char **out_json);

/*
 Answers a result-digit-and-carry challenge. `out_verdict` and
 `out_json` (the full response with expected values and explanation) may
 each be NULL.
 */
enum TbStatus tb_session_respond(struct TbSession *session,
                                 const char *challenge_id,
                                 int64_t digit,
                                 int64_t carry,
                                 enum TbVerdict *out_verdict,
                                 char **out_json);

/*
 Answers any challenge kind with a JSON body such as
 `{"challenge_id":"p0-product","product":"5964"}` or
 `{"challenge_id":"p0-s1-raw","raw_value":12}`.
 */
enum TbStatus tb_session_respond_json(struct TbSession *session,
                                      const char *answer_json,
                                      enum TbVerdict *out_verdict,
                                      char **out_json);

/*
 Score, per-multiplier accuracy and progress as JSON.
 */
enum TbStatus tb_session_summary(const struct TbSession *session, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRACHTENBERG_H */
