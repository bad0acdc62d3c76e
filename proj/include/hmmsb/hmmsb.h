#ifndef HMMSB_H
#define HMMSB_H

#include <stdint.h>

#if defined(_WIN32)
#define HMMSB_API __declspec(dllexport)
#else
#define HMMSB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hmmsb_status {
  HMMSB_OK = 0,
  HMMSB_ERR_USAGE = 1,    /* bad arguments or configuration */
  HMMSB_ERR_INPUT = 2,    /* malformed input file */
  HMMSB_ERR_INTERNAL = 3  /* internal consistency fault */
} hmmsb_status;

HMMSB_API const char* hmmsb_version(void);

/* Message for the last failed call on this thread ("" if none). */
HMMSB_API const char* hmmsb_last_error(void);

typedef struct hmmsb_hyper {
  int32_t depth; /* K */
  double gamma;
  double m;
  double pi;
  double lambda1;
  double lambda2;
} hmmsb_hyper;

HMMSB_API void hmmsb_hyper_init(hmmsb_hyper* hyper);

typedef struct hmmsb_chain_options {
  int64_t burnin;
  int64_t samples;
  int64_t lag;
  int32_t random_scan;
} hmmsb_chain_options;

HMMSB_API void hmmsb_chain_options_init(hmmsb_chain_options* options);

/* -- networks ------------------------------------------------------------- */

typedef struct hmmsb_network hmmsb_network;

HMMSB_API hmmsb_status hmmsb_network_create(int32_t n_actors, hmmsb_network** out);
/* labels_path may be NULL. */
HMMSB_API hmmsb_status hmmsb_network_read(const char* edges_path, const char* labels_path,
                                          hmmsb_network** out);
HMMSB_API hmmsb_status hmmsb_network_set_edge(hmmsb_network* network, int32_t src, int32_t dst,
                                              int32_t present);
HMMSB_API int32_t hmmsb_network_size(const hmmsb_network* network);
HMMSB_API int32_t hmmsb_network_edge(const hmmsb_network* network, int32_t src, int32_t dst);
HMMSB_API int64_t hmmsb_network_edge_count(const hmmsb_network* network);
HMMSB_API void hmmsb_network_free(hmmsb_network* network);

/* -- inference -------------------------------------------------------------- */

typedef struct hmmsb_chain hmmsb_chain;

HMMSB_API hmmsb_status hmmsb_chain_run(const hmmsb_network* network, const hmmsb_hyper* hyper,
                                       const hmmsb_chain_options* options, uint64_t seed,
                                       hmmsb_chain** out);
HMMSB_API int64_t hmmsb_chain_sample_count(const hmmsb_chain* chain);
HMMSB_API int64_t hmmsb_chain_trace_length(const hmmsb_chain* chain);
HMMSB_API double hmmsb_chain_trace_at(const hmmsb_chain* chain, int64_t iteration);
/* Writes the canonical path of `actor` in retained sample `sample` (depth entries). */
HMMSB_API hmmsb_status hmmsb_chain_path(const hmmsb_chain* chain, int64_t sample, int32_t actor,
                                        int32_t* labels);
HMMSB_API void hmmsb_chain_free(hmmsb_chain* chain);

HMMSB_API hmmsb_status hmmsb_log_marginal(const hmmsb_network* network, const hmmsb_hyper* hyper,
                                          int64_t n_samples, uint64_t seed, double* log_estimate,
                                          double* std_error);

/* -- commands ------------------------------------------------------------------
 * Each writes its files atomically: either every output appears or none. The
 * `invocation` string, if set, is recorded in every file's manifest. */

typedef struct hmmsb_simulate_options {
  const char* out_prefix;
  const char* invocation;
  uint64_t seed;
  int32_t n_actors;
  hmmsb_hyper hyper;
  int32_t regime;            /* 1..4 preset B; 0 draws entries from Beta(lambda1, lambda2) */
  int32_t b_length;          /* > 0: explicit per-level B, overrides regime */
  const double* b_on;        /* same-branch probability per level */
  const double* b_off;       /* cross-branch probability per level */
  int32_t theta_length;      /* > 0: fixed membership vector for every actor */
  const double* theta;
  int32_t renormalized_levels; /* draw levels from renormalized theta instead of the conditioned prior */
} hmmsb_simulate_options;

HMMSB_API void hmmsb_simulate_options_init(hmmsb_simulate_options* options);
HMMSB_API hmmsb_status hmmsb_cmd_simulate(const hmmsb_simulate_options* options);

typedef struct hmmsb_infer_options {
  const char* edges_path;
  const char* labels_path; /* may be NULL */
  const char* out_prefix;
  const char* invocation;
  uint64_t seed;
  hmmsb_hyper hyper;
  hmmsb_chain_options chain;
  const char* grid; /* "none", "gamma", "lambda" or "both" */
  int64_t is_samples;
  int32_t threads;
  int32_t min_community_size;
  int32_t network_dot; /* also render the network */
} hmmsb_infer_options;

HMMSB_API void hmmsb_infer_options_init(hmmsb_infer_options* options);
HMMSB_API hmmsb_status hmmsb_cmd_infer(const hmmsb_infer_options* options);

typedef struct hmmsb_eval_f1_options {
  const char* predicted_path;
  const char* truth_path;
  const char* out_path;
  const char* invocation;
} hmmsb_eval_f1_options;

HMMSB_API void hmmsb_eval_f1_options_init(hmmsb_eval_f1_options* options);
/* total_f1 may be NULL. */
HMMSB_API hmmsb_status hmmsb_cmd_eval_f1(const hmmsb_eval_f1_options* options, double* total_f1);

typedef struct hmmsb_heldout_options {
  const char* edges_path;
  const char* out_prefix;
  const char* invocation;
  uint64_t seed;
  hmmsb_hyper hyper; /* base values for parameters outside the grid */
  int32_t splits;
  const char* grid;
  int64_t is_samples;
  int32_t threads;
} hmmsb_heldout_options;

HMMSB_API void hmmsb_heldout_options_init(hmmsb_heldout_options* options);
/* mean_test_log_marginal may be NULL. */
HMMSB_API hmmsb_status hmmsb_cmd_heldout(const hmmsb_heldout_options* options,
                                         double* mean_test_log_marginal);

typedef struct hmmsb_export_dot_options {
  const char* hierarchy_path;
  const char* edges_path;   /* may be NULL: hierarchy only */
  const char* samples_path; /* may be NULL: every edge drawn at level 1 */
  const char* out_prefix;
  const char* invocation;
} hmmsb_export_dot_options;

HMMSB_API void hmmsb_export_dot_options_init(hmmsb_export_dot_options* options);
HMMSB_API hmmsb_status hmmsb_cmd_export_dot(const hmmsb_export_dot_options* options);

typedef struct hmmsb_recount_report {
  int64_t records;
  int64_t failures;
} hmmsb_recount_report;

/* Rebuilds the counts of every retained sample and checks them, the recorded
 * log-likelihood, and compatibility of every observed edge. Returns
 * HMMSB_ERR_INTERNAL if any record fails. */
HMMSB_API hmmsb_status hmmsb_cmd_recount_check(const char* samples_path, const char* edges_path,
                                               hmmsb_recount_report* report);

#ifdef __cplusplus
}
#endif

#endif
