#ifndef TABLETOP_H
#define TABLETOP_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum TtStatus {
  TT_STATUS_OK = 0,
  TT_STATUS_NULL_ARGUMENT = 1,
  TT_STATUS_INVALID_UTF8 = 2,
  TT_STATUS_MALFORMED_JSON = 3,
  TT_STATUS_INVALID_CONFIG = 4,
  TT_STATUS_REJECTED_FRAME = 5,
  TT_STATUS_NOT_FOUND = 6,
  TT_STATUS_STORE_ERROR = 7,
  TT_STATUS_PANIC = 8,
} TtStatus;

/**
 * A live game session.
 */
typedef struct TtSession TtSession;

/**
 * A directory of saved sessions.
 */
typedef struct TtStore TtStore;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *tt_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string obtained from this library, freed once.
 */
void tt_string_free(char *s);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tt_version(void);

/**
 * Creates a session. `overrides_json` is a JSON object merged onto the
 * default configuration, or null for defaults.
 *
 * # Safety
 * `overrides_json` must be null or a NUL-terminated string; `out` must be
 * valid for writes.
 */
enum TtStatus tt_session_new(const char *overrides_json, struct TtSession **out);

/**
 * Destroys a session. Null is ignored.
 *
 * # Safety
 * `session` must be null or a handle from [`tt_session_new`], freed once.
 */
void tt_session_free(struct TtSession *session);

/**
 * Feeds one skeleton frame (JSON) to the session. On success `out_events`
 * receives a JSON array of the events the frame produced. A rejected frame
 * leaves the session unchanged.
 *
 * # Safety
 * `session` must be a live handle, `frame_json` a NUL-terminated string and
 * `out_events` valid for writes.
 */
enum TtStatus tt_session_push_frame(struct TtSession *session,
                                    const char *frame_json,
                                    char **out_events);

/**
 * Writes the current state snapshot (the protocol's `state` body) as JSON.
 *
 * # Safety
 * `session` must be a live handle and `out_json` valid for writes.
 */
enum TtStatus tt_session_state(struct TtSession *session, char **out_json);

/**
 * Writes the session metrics as JSON. Metrics of a session without drops
 * are absent from the object.
 *
 * # Safety
 * `session` must be a live handle and `out_json` valid for writes.
 */
enum TtStatus tt_session_metrics(struct TtSession *session, char **out_json);

/**
 * Current score and target radius.
 *
 * # Safety
 * `session` must be a live handle; `out_score` and `out_radius` must be
 * valid for writes.
 */
enum TtStatus tt_session_progress(struct TtSession *session,
                                  uint32_t *out_score,
                                  double *out_radius);

/**
 * Opens (creating if needed) a session store directory.
 *
 * # Safety
 * `root` must be a NUL-terminated path and `out` valid for writes.
 */
enum TtStatus tt_store_open(const char *root, struct TtStore **out);

/**
 * Closes a store. Null is ignored.
 *
 * # Safety
 * `store` must be null or a handle from [`tt_store_open`], freed once.
 */
void tt_store_free(struct TtStore *store);

/**
 * Saves a snapshot of the session under a fresh id, written to `out_id`.
 * The session stays usable.
 *
 * # Safety
 * Both handles must be live and `out_id` valid for writes.
 */
enum TtStatus tt_store_save_session(struct TtStore *store,
                                    struct TtSession *session,
                                    char **out_id);

/**
 * Writes the summaries of all stored sessions as a JSON array.
 *
 * # Safety
 * `store` must be a live handle and `out_json` valid for writes.
 */
enum TtStatus tt_store_list(struct TtStore *store, char **out_json);

/**
 * Loads a stored session record as JSON.
 *
 * # Safety
 * `store` must be a live handle, `id` a NUL-terminated string and
 * `out_json` valid for writes.
 */
enum TtStatus tt_store_load(struct TtStore *store, const char *id, char **out_json);

/**
 * Deletes a stored session.
 *
 * # Safety
 * `store` must be a live handle and `id` a NUL-terminated string.
 */
enum TtStatus tt_store_delete(struct TtStore *store, const char *id);

/**
 * Per-axis sensor noise standard deviation at `depth` meters.
 */
double tt_noise_sigma(double sigma_near, double sigma_far, double depth);

/**
 * Whether a landing point lies inside (or on) the target disc.
 */
bool tt_hit_test(double landing_x,
                 double landing_z,
                 double center_x,
                 double center_z,
                 double radius);

/**
 * One difficulty update with the default policy. `hit` selects the
 * outcome; the streak counters are carried in and out through pointers.
 *
 * # Safety
 * All pointers must be valid for reads and writes.
 */
enum TtStatus tt_dda_update(double *radius,
                            uint32_t *success_streak,
                            uint32_t *miss_streak,
                            bool hit);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* TABLETOP_H */
