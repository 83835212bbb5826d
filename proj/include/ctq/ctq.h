/* C API of the ctq cluster-state teleportation engine.
 *
 * All functions return ctq_status; CTQ_OK is 0. On failure,
 * ctq_last_error() gives a thread-local description of the most recent
 * error on the calling thread. Strings returned through char** are
 * heap-allocated and must be released with ctq_string_free(). Handles are
 * opaque; release them with the matching *_free().
 *
 * Node indices are 1-based. Scenario names: bca, cab, pairwise-ab,
 * pairwise-bc, pairwise-ca, merge, hop-a2, hop-a3, one-two.
 */

#ifndef CTQ_H
#define CTQ_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ctq_status {
    CTQ_OK = 0,
    CTQ_ERR_INVALID_ARGUMENT = 1,
    CTQ_ERR_NOT_SYMMETRIC = 2,
    CTQ_ERR_NONZERO_DIAGONAL = 3,
    CTQ_ERR_NOT_POSITIVE_DEFINITE = 4,
    CTQ_ERR_EIGENDECOMPOSITION = 5,
    CTQ_ERR_NODE_ALREADY_MEASURED = 6,
    CTQ_ERR_DUPLICATE_INPUT_TAG = 7,
    CTQ_ERR_MODE_ALREADY_MEASURED = 8,
    CTQ_ERR_SINGULAR_SYSTEM = 9,
    CTQ_ERR_INCOMPATIBLE_GRAPH = 10,
    CTQ_ERR_PROTOCOL_BROKEN = 11,
    CTQ_ERR_DIMENSION_MISMATCH = 12,
    CTQ_ERR_NOT_SYMPLECTIC = 13,
    CTQ_ERR_DEGENERATE_MARGINAL = 14,
    CTQ_ERR_NOT_FOUND = 15,
    CTQ_ERR_LABEL_COLLISION = 16,
    CTQ_ERR_IO = 17,
    CTQ_ERR_INTERNAL = 18
} ctq_status;

typedef struct ctq_graph ctq_graph;
typedef struct ctq_report ctq_report;

const char* ctq_version(void);

/* Thread-local message of the last failing call on this thread. */
const char* ctq_last_error(void);

void ctq_string_free(char* s);

/* ---- graphs -------------------------------------------------------- */

ctq_status ctq_graph_twelve(ctq_graph** out);
ctq_status ctq_graph_three(double g12, double g13, double g23, ctq_graph** out);
ctq_status ctq_graph_two(ctq_graph** out);

/* Validates an n x n row-major weight matrix (symmetric, zero diagonal). */
ctq_status ctq_graph_from_data(int n, const double* weights, ctq_graph** out);

/* Plain-text format: first line n, then n rows of n space-separated reals. */
ctq_status ctq_graph_from_file(const char* path, ctq_graph** out);
ctq_status ctq_graph_write_file(const ctq_graph* graph, const char* path);

/* Graph specs used by the CLI: "twelve", "three:g12,g13,g23", "two",
 * "file:<path>". */
ctq_status ctq_graph_from_spec(const char* spec, ctq_graph** out);

int ctq_graph_node_count(const ctq_graph* graph);
double ctq_graph_weight(const ctq_graph* graph, int i, int j);

/* JSON with the weights, I+A^2, its inverse and eigenvalue range. */
ctq_status ctq_graph_describe(const ctq_graph* graph, char** out_json);

void ctq_graph_free(ctq_graph* graph);

/* ---- protocols ------------------------------------------------------ */

ctq_status ctq_run_protocol(const ctq_graph* graph, const char* scenario, ctq_report** out);

int ctq_report_output_count(const ctq_report* report);

/* Error-variance coefficients in report row order (all X rows, then all Y
 * rows). `capacity` is the length of `out`. */
ctq_status ctq_report_variances(const ctq_report* report, double* out, int capacity);

ctq_status ctq_report_json(const ctq_report* report, char** out_json);

void ctq_report_free(ctq_report* report);

/* Full single-run document: the report plus, when with_oracle is nonzero,
 * the covariance-simulation cross-check at squeezing s_db. */
ctq_status ctq_run_json(const ctq_graph* graph, const char* scenario, double s_db,
                        uint64_t seed, int with_oracle, char** out_json);

/* ---- analysis -------------------------------------------------------- */

/* xy_pairs holds npairs (x_er, y_er) pairs. */
ctq_status ctq_error_probability(const double* xy_pairs, int npairs, double s_db, double* out_p);

ctq_status ctq_optimize_weight(double s_db, double* out_g, double* out_p);

ctq_status ctq_dominance_interval(double* out_low, double* out_high);

/* Writes the sweep CSV (header s,p_twelve,p_three_g1,p_two) atomically. */
ctq_status ctq_sweep_csv(double s_min, double s_max, double step, const char* path);

/* ---- verification ---------------------------------------------------- */

/* Runs the verification suite; *out_failures receives the number of failing
 * criteria. Either output pointer may be NULL. */
ctq_status ctq_verify(uint64_t seed, char** out_table, char** out_json, int* out_failures);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CTQ_H */
