/* C interface to the AIST crime-prediction toolkit.
 *
 * All entry points are thread-compatible: distinct options/session objects
 * may be used from distinct threads, but a single object must not be shared
 * without external synchronization. Error messages for the calling thread's
 * most recent failing call are available via aist_last_error().
 */
#ifndef AIST_AIST_H
#define AIST_AIST_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum aist_status {
  AIST_OK = 0,
  AIST_USAGE_ERROR = 1,      /* bad command line / option combination */
  AIST_IO_ERROR = 2,         /* missing or unreadable/unwritable file */
  AIST_DATA_ERROR = 3,       /* malformed input data */
  AIST_CONFIG_ERROR = 4,     /* invalid configuration value */
  AIST_DIVERGENCE_ERROR = 5, /* training loss became non-finite */
  AIST_INTERNAL_ERROR = 6    /* invariant violation; please report */
} aist_status;

/* Semantic version of the library. */
const char* aist_version(void);

/* Message of the calling thread's most recent failing call ("" if none). */
const char* aist_last_error(void);

/* Option bag for aist_run: string key/value pairs mirroring the CLI's long
 * options without the leading dashes (e.g. "cache", "out", "set"). */
typedef struct aist_options aist_options;

aist_options* aist_options_new(void);
void aist_options_free(aist_options* opts);
aist_status aist_options_set(aist_options* opts, const char* key, const char* value);

/* Runs one subcommand: "ingest", "synth", "train", "eval", "ablate",
 * "explain", "faithfulness" or "sweep". opts may be NULL (no options). */
aist_status aist_run(const char* command, const aist_options* opts);

/* In-process prediction against a trained checkpoint and a tensor cache. */
typedef struct aist_session aist_session;

aist_status aist_open_session(const char* checkpoint_path, const char* cache_dir,
                              aist_session** out);
void aist_close_session(aist_session* session);

/* Predicts the crime count for one region id at a 1-based time-step label
 * (the step must have full lookback history in the cache). On success writes
 * the denormalized count to *count and, if norm is non-NULL, the raw model
 * output in [-1, 1] to *norm. */
aist_status aist_session_predict(aist_session* session, int region_id, int target_step,
                                 double* count, double* norm);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* AIST_AIST_H */
