#ifndef LINEAGE_EVAL_H
#define LINEAGE_EVAL_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a fallible call.
 */
typedef enum LeStatus {
  /**
   * The call succeeded.
   */
  LE_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  LE_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  LE_STATUS_INVALID_UTF8 = 2,
  /**
   * The input failed to parse or violated a structural invariant.
   */
  LE_STATUS_INVALID_INPUT = 3,
  /**
   * The two graphs cannot be compared under the requested matching.
   */
  LE_STATUS_INCOMPARABLE = 4,
} LeStatus;

/**
 * Opaque tracking graph handle.
 */
typedef struct LeGraph LeGraph;

/**
 * Opaque evaluation report handle.
 */
typedef struct LeReport LeReport;

/**
 * Score weights; obtain the library defaults from
 * [`le_weights_default`].
 */
typedef struct LeWeights {
  double ns;
  double fn_;
  double fp;
  double ed;
  double ea;
  double ec;
} LeWeights;

/**
 * The six edit counts of a report.
 */
typedef struct LeCounts {
  uint32_t ns;
  uint32_t fn_;
  uint32_t fp;
  uint32_t ed;
  uint32_t ea;
  uint32_t ec;
} LeCounts;

/**
 * Division-detection precision/recall under tolerances.
 */
typedef struct LePrecisionRecall {
  double precision;
  double recall;
  double f1;
} LePrecisionRecall;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread; empty
 * string if the last fallible call succeeded. The pointer is invalidated
 * by the next fallible call on the same thread.
 */
const char *le_last_error_message(void);

/**
 * Parses a JSON graph document into a new graph handle.
 *
 * # Safety
 * `text` must be NUL-terminated; `out_graph` must be a valid pointer.
 */
enum LeStatus le_graph_parse_document(const char *text, struct LeGraph **out_graph);

/**
 * Parses "label begin end parent" track records (without geometry) into
 * a new graph handle.
 *
 * # Safety
 * `text` must be NUL-terminated; `out_graph` must be a valid pointer.
 */
enum LeStatus le_graph_parse_tracks(const char *text, struct LeGraph **out_graph);

/**
 * Releases a graph handle; NULL is a no-op.
 *
 * # Safety
 * `graph` must come from this library and not be freed twice.
 */
void le_graph_free(struct LeGraph *graph);

/**
 * Number of vertices; 0 for NULL.
 */
uint64_t le_graph_vertex_count(const struct LeGraph *graph);

/**
 * Number of edges; 0 for NULL.
 */
uint64_t le_graph_edge_count(const struct LeGraph *graph);

/**
 * Number of division events; 0 for NULL.
 */
uint64_t le_graph_mitosis_count(const struct LeGraph *graph);

/**
 * New graph with every division link removed; NULL for NULL.
 *
 * # Safety
 * `graph` must be a live handle from this library.
 */
struct LeGraph *le_graph_strip_links(const struct LeGraph *graph);

/**
 * The library's default score weights.
 */
struct LeWeights le_weights_default(void);

/**
 * Scores `computed` against `reference` under id matching. `weights`
 * may be NULL for the defaults.
 *
 * # Safety
 * All handles must be live; `out_report` must be a valid pointer.
 */
enum LeStatus le_evaluate(const struct LeGraph *reference,
                          const struct LeGraph *computed,
                          const struct LeWeights *weights,
                          struct LeReport **out_report);

/**
 * Releases a report handle; NULL is a no-op.
 *
 * # Safety
 * `report` must come from this library and not be freed twice.
 */
void le_report_free(struct LeReport *report);

/**
 * Weighted total of a report; NaN for NULL.
 */
double le_report_total(const struct LeReport *report);

/**
 * Copies the six edit counts out of a report.
 *
 * # Safety
 * `report` must be live; `out_counts` must be a valid pointer.
 */
enum LeStatus le_report_counts(const struct LeReport *report, struct LeCounts *out_counts);

/**
 * Serializes a report to JSON. The returned string is owned by the
 * caller; release it with [`le_string_free`]. NULL for NULL input.
 *
 * # Safety
 * `report` must be a live handle from this library.
 */
char *le_report_json(const struct LeReport *report);

/**
 * Releases a string returned by this library; NULL is a no-op.
 *
 * # Safety
 * `text` must come from this library and not be freed twice.
 */
void le_string_free(char *text);

/**
 * Division-detection precision/recall between two graphs at the given
 * tolerances (frames, pixels).
 *
 * # Safety
 * Both graph handles must be live; `out` must be a valid pointer.
 */
enum LeStatus le_mitosis_precision_recall(const struct LeGraph *reference,
                                          const struct LeGraph *computed,
                                          uint32_t temporal_tolerance,
                                          double spatial_tolerance,
                                          struct LePrecisionRecall *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LINEAGE_EVAL_H */
