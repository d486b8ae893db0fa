/* C interface for the batch RL workbench (brl).
 *
 * All functions return a BRL_* status code unless documented otherwise.
 * On failure, brl_last_error() returns a NUL-terminated message for the
 * most recent error on the calling thread; the pointer stays valid
 * until the next failing call on that thread.
 *
 * Link against the brl_ffi cdylib or staticlib.
 */

#ifndef BRL_H
#define BRL_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define BRL_OK 0
#define BRL_ERR_IO 1
#define BRL_ERR_USAGE 2
#define BRL_ERR_CONFIG 3
#define BRL_ERR_INPUT_SHAPE 4
#define BRL_ERR_PHASE 5
#define BRL_ERR_FORMAT 6
#define BRL_ERR_CORRUPTION 7
#define BRL_ERR_DIVERGENCE 8
#define BRL_ERR_PARSE 9
#define BRL_ERR_JSON 10
#define BRL_ERR_NULL 100
#define BRL_ERR_UTF8 101
#define BRL_ERR_PANIC 102
#define BRL_ERR_RANGE 103

/* Opaque handle over an on-disk "BRL1" transition dataset. */
typedef struct BrlDataset BrlDataset;

/* Static library version string (do not free). */
const char *brl_version(void);

/* Most recent error message on this thread (do not free). */
const char *brl_last_error(void);

/* Run one experiment phase described by a JSON config document.
 * The schema matches the CLI's --config file, including the "phase"
 * key: explore | train | eval | coverage | report. Artifacts are
 * written to the paths named in the config. */
int32_t brl_run_json(const char *config_json);

/* Open a dataset file; writes the handle to *out on success.
 * Release with brl_dataset_close. */
int32_t brl_dataset_open(const char *path, BrlDataset **out);

/* Free a dataset handle. NULL is a no-op. */
void brl_dataset_close(BrlDataset *ds);

/* Transition count; 0 for NULL handles. */
uint64_t brl_dataset_len(const BrlDataset *ds);

/* Observation dimensionality; 0 for NULL handles. */
uint32_t brl_dataset_obs_dim(const BrlDataset *ds);

/* Action dimensionality; 0 for NULL handles. */
uint32_t brl_dataset_act_dim(const BrlDataset *ds);

/* Copy transition idx into the caller's buffers. obs and next_obs
 * receive obs_dim doubles each, action receives act_dim doubles, and
 * flags one byte (bit0 = done, bit1 = timeout). Any output pointer may
 * be NULL to skip that field. */
int32_t brl_dataset_transition(const BrlDataset *ds,
                               uint64_t idx,
                               double *obs,
                               double *action,
                               double *next_obs,
                               uint8_t *flags);

#ifdef __cplusplus
}
#endif

#endif /* BRL_H */
