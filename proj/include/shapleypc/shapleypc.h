/* C interface of libshapleypc.
 *
 * Every fallible call returns an spc_status; on failure a description is
 * available from spc_last_error() on the same thread until the next call.
 * Objects are opaque and owned by the caller once returned; release them
 * with the matching *_free function. Strings returned through char** are
 * allocated by the library and released with spc_string_free().
 */
#ifndef SHAPLEYPC_H
#define SHAPLEYPC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SPC_BUILDING_LIBRARY)
#    define SPC_API __declspec(dllexport)
#  else
#    define SPC_API __declspec(dllimport)
#  endif
#else
#  define SPC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum spc_status {
  SPC_OK = 0,
  SPC_ERR_INVALID_ARGUMENT = 1,
  SPC_ERR_INDEX = 2,
  SPC_ERR_CYCLE = 3,
  SPC_ERR_DUPLICATE_EDGE = 4,
  SPC_ERR_SELF_LOOP = 5,
  SPC_ERR_NOT_ADJACENT = 6,
  SPC_ERR_DEGENERATE_COLUMN = 7,
  SPC_ERR_SINGULAR_MATRIX = 8,
  SPC_ERR_INSUFFICIENT_SAMPLES = 9,
  SPC_ERR_INVALID_COALITION = 10,
  SPC_ERR_NOT_UNSHIELDED_TRIPLE = 11,
  SPC_ERR_EMPTY_TEST_SET = 12,
  SPC_ERR_TOO_DENSE = 13,
  SPC_ERR_SAMPLE_CAP_EXCEEDED = 14,
  SPC_ERR_PARSE = 15,
  SPC_ERR_SEMANTIC = 16,
  SPC_ERR_NODE_COUNT_MISMATCH = 17,
  SPC_ERR_DIVISION_BY_ZERO = 18,
  SPC_ERR_NO_PATHS = 19,
  SPC_ERR_EMPTY_RESULTS = 20,
  SPC_ERR_IO = 21,
  SPC_ERR_CONFIG = 22,
  SPC_ERR_INTERNAL = 99
} spc_status;

typedef struct spc_graph spc_graph;     /* DAG, PDAG or CPDAG */
typedef struct spc_dataset spc_dataset; /* numeric samples */
typedef struct spc_network spc_network; /* discrete Bayesian network */
typedef struct spc_result spc_result;   /* output of one PC run */

SPC_API const char* spc_version(void);
SPC_API const char* spc_last_error(void);
SPC_API void spc_string_free(char* str);

/* Graphs. Text form: "nodes N" then one "i j ->" or "i j --" per line. */
SPC_API spc_status spc_graph_create(size_t num_nodes, spc_graph** out);
SPC_API spc_status spc_graph_load(const char* path, spc_graph** out);
SPC_API spc_status spc_graph_save(const spc_graph* g, const char* path);
SPC_API spc_status spc_graph_from_string(const char* text, spc_graph** out);
SPC_API spc_status spc_graph_to_string(const spc_graph* g, char** out);
SPC_API spc_status spc_graph_add_directed(spc_graph* g, size_t from, size_t to);
SPC_API spc_status spc_graph_add_undirected(spc_graph* g, size_t a, size_t b);
SPC_API size_t spc_graph_num_nodes(const spc_graph* g);
SPC_API size_t spc_graph_num_edges(const spc_graph* g);
SPC_API spc_status spc_graph_equal(const spc_graph* a, const spc_graph* b, int* out);
/* Fails with SPC_ERR_CYCLE or SPC_ERR_INVALID_ARGUMENT unless g is a DAG. */
SPC_API spc_status spc_graph_cpdag(const spc_graph* dag, spc_graph** out);
SPC_API spc_status spc_graph_d_separated(const spc_graph* dag, size_t i, size_t j, const size_t* conditioning,
                                         size_t conditioning_size, int* out);
SPC_API void spc_graph_free(spc_graph* g);

/* Erdos-Renyi DAG with num_nodes * density edges. */
SPC_API spc_status spc_er_dag(size_t num_nodes, double density, uint64_t seed, spc_graph** out);

/* Data. sem is one of linear-gauss, linear-exp, linear-gumbel,
 * linear-uniform, mlp, mim, gp, gp-add. */
SPC_API spc_status spc_simulate(const spc_graph* dag, const char* sem, size_t num_samples, uint64_t seed,
                                int standardize, spc_dataset** out);
SPC_API spc_status spc_dataset_from_matrix(const double* row_major, size_t rows, size_t cols, spc_dataset** out);
SPC_API spc_status spc_dataset_load_csv(const char* path, spc_dataset** out);
SPC_API spc_status spc_dataset_save_csv(const spc_dataset* ds, const char* path);
SPC_API size_t spc_dataset_rows(const spc_dataset* ds);
SPC_API size_t spc_dataset_cols(const spc_dataset* ds);
SPC_API spc_status spc_dataset_get(const spc_dataset* ds, size_t row, size_t col, double* out);
SPC_API spc_status spc_dataset_standardize(spc_dataset* ds);
SPC_API void spc_dataset_free(spc_dataset* ds);

/* Discovery. options_json may be NULL; recognised keys: alpha, rule
 * (SPC, MaxPC, CPC, MPC, Vanilla), workers, require_negative_siv,
 * tie_break (all-minimizers, lowest-index), family_mode (deduplicated,
 * multiset), siv_threshold. */
SPC_API spc_status spc_discover(const spc_dataset* ds, const char* options_json, spc_result** out);
SPC_API spc_status spc_discover_oracle(const spc_graph* truth_dag, const char* options_json, spc_result** out);
SPC_API spc_status spc_result_graph(const spc_result* r, spc_graph** out);
SPC_API size_t spc_result_num_tests(const spc_result* r);
SPC_API double spc_result_elapsed_seconds(const spc_result* r);
/* One JSON object per evaluated unshielded triple (SPC only). */
SPC_API spc_status spc_result_siv_jsonl(const spc_result* r, char** out);
SPC_API void spc_result_free(spc_result* r);

/* Metrics of an estimate against a true DAG, as a JSON object. With
 * cpdag_target the marks are compared with the truth's CPDAG instead of
 * penalizing undirected edges. */
SPC_API spc_status spc_metrics_json(const spc_graph* est, const spc_graph* truth_dag, int cpdag_target, char** out);
SPC_API spc_status spc_saturation(size_t num_nodes, double density, double* out);

/* BIF networks. */
SPC_API spc_status spc_bif_load(const char* path, spc_network** out);
SPC_API spc_status spc_bif_parse(const char* text, spc_network** out);
SPC_API spc_status spc_bif_to_string(const spc_network* net, char** out);
SPC_API size_t spc_network_num_variables(const spc_network* net);
SPC_API spc_status spc_network_graph(const spc_network* net, spc_graph** out);
/* Forward sampling. codes_csv_path (may be NULL) receives the raw state
 * codes; encoded (may be NULL) receives the label-encoded, standardized
 * data. */
SPC_API spc_status spc_bif_sample(const spc_network* net, size_t num_samples, uint64_t seed,
                                  const char* codes_csv_path, spc_dataset** encoded);
SPC_API void spc_network_free(spc_network* net);

/* Benchmarks. config_json is a JSON object of sweep settings; either
 * output path may be NULL. */
SPC_API spc_status spc_bench_run(const char* config_json, const char* csv_path, const char* json_path);
/* Comma-separated results CSV header. */
SPC_API spc_status spc_result_columns(char** out);
/* group_keys is comma separated; NULL means zeta,sem_class,rule. */
SPC_API spc_status spc_plotdata(const char* results_csv_path, const char* group_keys, const char* out_path);

#ifdef __cplusplus
}
#endif

#endif
