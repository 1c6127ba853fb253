#ifndef HDQCHAIN_H
#define HDQCHAIN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  HQ_STATUS_OK = 0,
  HQ_STATUS_NULL_ARGUMENT = 1,
  HQ_STATUS_INVALID_UTF8 = 2,
  HQ_STATUS_CONFIG = 3,
  HQ_STATUS_RESOURCE = 4,
  HQ_STATUS_DOMAIN = 5,
  HQ_STATUS_ORDERING = 6,
  HQ_STATUS_INCOMPLETE_INPUT = 7,
  HQ_STATUS_PROTOCOL_VIOLATION = 8,
  HQ_STATUS_UNSUPPORTED = 9,
  HQ_STATUS_IO = 10,
  HQ_STATUS_OUT_OF_RANGE = 11,
  HQ_STATUS_PANIC = 12,
} HqStatus;

/**
 * Finished run: the report plus its JSON and CSV renderings.
 */
typedef struct HqRun HqRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses and runs a JSON scenario config. On success `*out` owns a new
 * handle; on failure it is set to null.
 *
 * # Safety
 * `config_json` must be a valid C string and `out` a writable pointer.
 */
HqStatus hq_run_new(const char *config_json, HqRun **out);

/**
 * As `hq_run_new`, with the config's seed replaced by `seed`.
 *
 * # Safety
 * Same as `hq_run_new`.
 */
HqStatus hq_run_new_seeded(const char *config_json, uint64_t seed, HqRun **out);

/**
 * # Safety
 * `run` must come from `hq_run_new*` and not be used afterwards. Null is a no-op.
 */
void hq_run_free(HqRun *run);

/**
 * # Safety
 * `run` must be a live handle or null.
 */
bool hq_run_all_pass(const HqRun *run);

/**
 * # Safety
 * `run` must be a live handle or null.
 */
size_t hq_run_row_count(const HqRun *run);

/**
 * Detected count, trial count and rate of row `index`. Any out pointer may be null.
 *
 * # Safety
 * `run` must be a live handle; non-null out pointers must be writable.
 */
HqStatus hq_run_row(const HqRun *run,
                    size_t index,
                    uint64_t *detected,
                    uint64_t *trials,
                    double *rate);

/**
 * Pretty JSON report, newline terminated. Borrowed from `run`.
 *
 * # Safety
 * `run` must be a live handle or null.
 */
const char *hq_run_report_json(const HqRun *run);

/**
 * # Safety
 * `run` must be a live handle or null.
 */
const char *hq_run_csv(const HqRun *run);

/**
 * # Safety
 * `run` must be a live handle or null.
 */
const char *hq_run_transcript_hash(const HqRun *run);

/**
 * Closed-form detection probability. `attack` is either a bare kind such as
 * `"intercept_resend"` or a full JSON scenario object. Returns
 * `HQ_STATUS_UNSUPPORTED` where no closed form exists.
 *
 * # Safety
 * `attack` must be a valid C string and `out` writable.
 */
HqStatus hq_oracle(const char *attack,
                   size_t qudit_dim,
                   size_t n_blocks,
                   size_t m_symbols,
                   double *out);

/**
 * Message for the last failure on this thread, or null.
 */
const char *hq_last_error(void);

const char *hq_version(void);

/**
 * Hash of the reference honest run with four blocks, N = 2, one symbol, seed 0.
 */
const char *hq_golden_transcript_hash(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HDQCHAIN_H */
