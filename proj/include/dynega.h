#ifndef DYNEGA_H
#define DYNEGA_H

/*
 * C interface to the embedding-landscape DynEGA library.
 *
 * Every function returns a dynega_status; on failure a thread-local message
 * is available through dynega_last_error(). Handles are opaque and owned by
 * the caller, who releases them with the matching *_free function.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef _WIN32
#  ifdef DYNEGA_BUILDING_LIBRARY
#    define DYNEGA_API __declspec(dllexport)
#  else
#    define DYNEGA_API __declspec(dllimport)
#  endif
#else
#  define DYNEGA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dynega_status {
    DYNEGA_OK = 0,
    DYNEGA_E_INVALID_ARGUMENT = 1,
    DYNEGA_E_IO = 2,
    DYNEGA_E_PARSE = 3,
    DYNEGA_E_DUPLICATE_ITEM_ID = 4,
    DYNEGA_E_UNKNOWN_DIMENSION = 5,
    DYNEGA_E_INVALID_POOL = 6,
    DYNEGA_E_MISSING_ID = 7,
    DYNEGA_E_EXTRA_ID = 8,
    DYNEGA_E_RAGGED_ROW = 9,
    DYNEGA_E_NON_FINITE = 10,
    DYNEGA_E_HTTP = 11,
    DYNEGA_E_INCONSISTENT_DIMENSION = 12,
    DYNEGA_E_RETRY_EXHAUSTED = 13,
    DYNEGA_E_EMPTY_GRID = 14,
    DYNEGA_E_ALL_DEPTHS_SKIPPED = 15,
    DYNEGA_E_NO_RESULTS = 16,
    DYNEGA_E_NUMERIC = 17,   /* degenerate numerical input (rank, variance, ...) */
    DYNEGA_E_INTERNAL = 99
} dynega_status;

/* Broad class of a status, matching the CLI exit codes. */
typedef enum dynega_error_class {
    DYNEGA_CLASS_NONE = 0,
    DYNEGA_CLASS_CONFIG = 1,
    DYNEGA_CLASS_DATA = 2,
    DYNEGA_CLASS_INTERNAL = 3
} dynega_error_class;

typedef struct dynega_pool_s* dynega_pool;
typedef struct dynega_embeddings_s* dynega_embeddings;
typedef struct dynega_trace_s* dynega_trace;

typedef struct dynega_glla_config {
    int n;
    int tau;
    double delta_t;
    int max_order;
    int use_order;
} dynega_glla_config;

typedef struct dynega_sweep_config {
    int depth_min;
    int depth_max; /* 0: min(D, 1298) */
    int depth_step;
    dynega_glla_config glla;
    double w_nmi;
    double w_tefi;
    int normalize_nmi;
    int walk_steps;
    unsigned threads; /* 0: hardware concurrency */
} dynega_sweep_config;

typedef struct dynega_optimum {
    int depth;
    double nmi;
    double tefi;
    double composite;
} dynega_optimum;

typedef struct dynega_depth_point {
    int depth;
    int ok;               /* 0 when the depth was skipped */
    const char* skip_reason; /* valid while the owning handle lives */
    int n_communities;
    int has_nmi;
    double nmi;
    double tefi;
    int has_composite;
    double composite;
} dynega_depth_point;

typedef struct dynega_fetch_config {
    const char* endpoint;
    const char* model;
    const char* api_key;
    const char* cache_dir; /* NULL or "" disables caching */
    size_t batch_size;     /* 0: 64 */
    int max_attempts;      /* 0: 5 */
    int backoff_initial_ms;
} dynega_fetch_config;

typedef struct dynega_fetch_stats {
    size_t requests;
    size_t retries;
    size_t cache_hits;
} dynega_fetch_stats;

typedef struct dynega_band {
    int begin;
    int end;
    double load;
} dynega_band;

typedef struct dynega_synthetic_spec {
    int n_dimensions;
    int total_depth;
    dynega_band signal;
    const dynega_band* secondary;
    size_t n_secondary;
    double noise_sd;
} dynega_synthetic_spec;

typedef struct dynega_mc_config {
    const int* k_grid;
    size_t n_k;
    int iterations;
    uint64_t base_seed;
    dynega_sweep_config sweep;
    dynega_synthetic_spec synthetic;
} dynega_mc_config;

typedef struct dynega_mc_summary {
    size_t cells;
    size_t failed;
    size_t computed; /* cells run in this call; the rest were resumed */
} dynega_mc_summary;

typedef void (*dynega_log_fn)(const char* message, void* user);

DYNEGA_API const char* dynega_version(void);
DYNEGA_API const char* dynega_last_error(void);
DYNEGA_API dynega_error_class dynega_status_class(dynega_status status);
DYNEGA_API const char* dynega_status_name(dynega_status status);
/* Process-wide log sink for progress and retry messages; NULL disables. */
DYNEGA_API void dynega_set_log(dynega_log_fn fn, void* user);

DYNEGA_API void dynega_glla_config_default(dynega_glla_config* cfg);
DYNEGA_API void dynega_sweep_config_default(dynega_sweep_config* cfg);
/* Shallow-signal template; `secondary` points at static storage. */
DYNEGA_API void dynega_synthetic_spec_default(dynega_synthetic_spec* spec);

/* Item pools */
DYNEGA_API dynega_status dynega_pool_load(const char* path, dynega_pool* out);
DYNEGA_API void dynega_pool_free(dynega_pool pool);
DYNEGA_API size_t dynega_pool_size(dynega_pool pool);
DYNEGA_API size_t dynega_pool_dimension_count(dynega_pool pool);

/* Embeddings */
DYNEGA_API dynega_status dynega_embeddings_load(const char* path, dynega_pool pool, dynega_embeddings* out);
DYNEGA_API dynega_status dynega_embeddings_fetch(const dynega_fetch_config* cfg, dynega_pool pool,
                                                 dynega_embeddings* out, dynega_fetch_stats* stats);
/* Format follows the extension: .jsonl writes JSONL, anything else CSV. */
DYNEGA_API dynega_status dynega_embeddings_save(dynega_embeddings emb, const char* path);
DYNEGA_API void dynega_embeddings_free(dynega_embeddings emb);
DYNEGA_API size_t dynega_embeddings_items(dynega_embeddings emb);
DYNEGA_API size_t dynega_embeddings_depth(dynega_embeddings emb);

/* Depth sweep against the pool's ground-truth labels */
DYNEGA_API dynega_status dynega_sweep(dynega_embeddings emb, dynega_pool truth, const dynega_sweep_config* cfg,
                                      dynega_trace* out);
DYNEGA_API void dynega_trace_free(dynega_trace trace);
DYNEGA_API size_t dynega_trace_size(dynega_trace trace);
DYNEGA_API dynega_status dynega_trace_point(dynega_trace trace, size_t index, dynega_depth_point* out);
DYNEGA_API dynega_status dynega_trace_optima(dynega_trace trace, dynega_optimum* nmi_only,
                                             dynega_optimum* tefi_only, dynega_optimum* composite);
/* trace.csv, optima.json and landscape.svg in out_dir */
DYNEGA_API dynega_status dynega_trace_write(dynega_trace trace, const char* out_dir);

/* Cross-sectional EGA baseline; writes ega.json when out_dir is non-NULL.
 * truth may be NULL. */
DYNEGA_API dynega_status dynega_ega(dynega_embeddings emb, dynega_pool truth, int walk_steps, const char* out_dir,
                                    dynega_depth_point* out);

/* Monte Carlo harness, persisted and resumable under results_dir. */
DYNEGA_API dynega_status dynega_montecarlo(const dynega_mc_config* cfg, const char* results_dir,
                                           dynega_mc_summary* out);
/* compare.csv + compare.svg; *rows receives the number of k rows. */
DYNEGA_API dynega_status dynega_compare(const char* results_dir, const char* out_dir, size_t* rows);
/* arrows.csv + vectorfield.svg; *arrows receives the arrow count. */
DYNEGA_API dynega_status dynega_vectorfield(const char* results_dir, const dynega_glla_config* glla,
                                            const char* out_dir, size_t* arrows);

/* Lower-case hex SHA-256 of a file; out must hold 65 bytes. */
DYNEGA_API dynega_status dynega_sha256_file(const char* path, char* out);

#ifdef __cplusplus
}
#endif

#endif /* DYNEGA_H */
