#include "dynega.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <new>
#include <string>

#include "dynega/error.hpp"
#include "dynega/ingest.hpp"
#include "dynega/landscape.hpp"
#include "dynega/pipeline.hpp"
#include "dynega/report.hpp"
#include "dynega/simgen.hpp"

struct dynega_pool_s {
    dynega::ItemPool pool;
};

struct dynega_embeddings_s {
    dynega::EmbeddingMatrix matrix;
};

struct dynega_trace_s {
    dynega::LandscapeTrace trace;
    dynega::SweepConfig cfg;
    std::size_t total_depth = 0;
};

namespace {

thread_local std::string last_error;

std::mutex log_mutex;
dynega_log_fn log_fn = nullptr;
void* log_user = nullptr;

void emit_log(std::string_view msg) {
    std::lock_guard lock(log_mutex);
    if (log_fn) log_fn(std::string(msg).c_str(), log_user);
}

dynega_status status_of(dynega::ErrorCode code) {
    using dynega::ErrorCode;
    switch (code) {
    case ErrorCode::InvalidArgument: return DYNEGA_E_INVALID_ARGUMENT;
    case ErrorCode::Io: return DYNEGA_E_IO;
    case ErrorCode::Parse: return DYNEGA_E_PARSE;
    case ErrorCode::DuplicateItemId: return DYNEGA_E_DUPLICATE_ITEM_ID;
    case ErrorCode::UnknownDimension: return DYNEGA_E_UNKNOWN_DIMENSION;
    case ErrorCode::InvalidPool: return DYNEGA_E_INVALID_POOL;
    case ErrorCode::MissingId: return DYNEGA_E_MISSING_ID;
    case ErrorCode::ExtraId: return DYNEGA_E_EXTRA_ID;
    case ErrorCode::RaggedRow: return DYNEGA_E_RAGGED_ROW;
    case ErrorCode::NonFiniteValue: return DYNEGA_E_NON_FINITE;
    case ErrorCode::Http: return DYNEGA_E_HTTP;
    case ErrorCode::InconsistentDimension: return DYNEGA_E_INCONSISTENT_DIMENSION;
    case ErrorCode::RetryExhausted: return DYNEGA_E_RETRY_EXHAUSTED;
    case ErrorCode::EmptyGrid: return DYNEGA_E_EMPTY_GRID;
    case ErrorCode::AllDepthsSkipped: return DYNEGA_E_ALL_DEPTHS_SKIPPED;
    case ErrorCode::NoResults: return DYNEGA_E_NO_RESULTS;
    case ErrorCode::Internal: return DYNEGA_E_INTERNAL;
    default: return DYNEGA_E_NUMERIC;
    }
}

template <class Fn>
dynega_status guarded(Fn&& fn) {
    try {
        fn();
        last_error.clear();
        return DYNEGA_OK;
    } catch (const dynega::Error& e) {
        last_error = e.what();
        return status_of(e.code());
    } catch (const std::filesystem::filesystem_error& e) {
        last_error = e.what();
        return DYNEGA_E_IO;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return DYNEGA_E_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return DYNEGA_E_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return DYNEGA_E_INTERNAL;
    }
}

dynega_status null_arg(const char* what) {
    last_error = std::string(what) + " must not be NULL";
    return DYNEGA_E_INVALID_ARGUMENT;
}

dynega::GllaConfig to_glla(const dynega_glla_config& c) {
    return {c.n, c.tau, c.delta_t, c.max_order, c.use_order};
}

dynega::SweepConfig to_sweep(const dynega_sweep_config& c) {
    dynega::SweepConfig s;
    s.depth_min = c.depth_min;
    s.depth_max = c.depth_max;
    s.depth_step = c.depth_step;
    s.glla = to_glla(c.glla);
    s.weights = {c.w_nmi, c.w_tefi};
    s.normalize_nmi = c.normalize_nmi != 0;
    s.walk_steps = c.walk_steps;
    return s;
}

void fill_point(const dynega::DepthResult& r, const std::optional<double>& composite, dynega_depth_point* out) {
    out->depth = r.depth;
    out->ok = r.ok() ? 1 : 0;
    out->skip_reason = r.skip_reason.c_str();
    out->n_communities = r.n_communities;
    out->has_nmi = r.nmi ? 1 : 0;
    out->nmi = r.nmi.value_or(0.0);
    out->tefi = r.tefi;
    out->has_composite = composite ? 1 : 0;
    out->composite = composite.value_or(0.0);
}

dynega_optimum to_c(const dynega::Optimum& o) { return {o.depth, o.nmi, o.tefi, o.composite}; }

const dynega_band kDefaultSecondary[] = {{400, 440, 0.35}};

} // namespace

extern "C" {

const char* dynega_version(void) { return DYNEGA_VERSION; }

const char* dynega_last_error(void) { return last_error.c_str(); }

dynega_error_class dynega_status_class(dynega_status status) {
    switch (status) {
    case DYNEGA_OK: return DYNEGA_CLASS_NONE;
    case DYNEGA_E_INVALID_ARGUMENT:
    case DYNEGA_E_EMPTY_GRID: return DYNEGA_CLASS_CONFIG;
    case DYNEGA_E_INTERNAL: return DYNEGA_CLASS_INTERNAL;
    default: return DYNEGA_CLASS_DATA;
    }
}

const char* dynega_status_name(dynega_status status) {
    switch (status) {
    case DYNEGA_OK: return "Ok";
    case DYNEGA_E_INVALID_ARGUMENT: return "InvalidArgument";
    case DYNEGA_E_IO: return "Io";
    case DYNEGA_E_PARSE: return "ParseError";
    case DYNEGA_E_DUPLICATE_ITEM_ID: return "DuplicateItemId";
    case DYNEGA_E_UNKNOWN_DIMENSION: return "UnknownDimension";
    case DYNEGA_E_INVALID_POOL: return "InvalidPool";
    case DYNEGA_E_MISSING_ID: return "MissingId";
    case DYNEGA_E_EXTRA_ID: return "ExtraId";
    case DYNEGA_E_RAGGED_ROW: return "RaggedRow";
    case DYNEGA_E_NON_FINITE: return "NonFiniteValue";
    case DYNEGA_E_HTTP: return "HttpError";
    case DYNEGA_E_INCONSISTENT_DIMENSION: return "InconsistentDimension";
    case DYNEGA_E_RETRY_EXHAUSTED: return "RetryExhausted";
    case DYNEGA_E_EMPTY_GRID: return "EmptyGrid";
    case DYNEGA_E_ALL_DEPTHS_SKIPPED: return "AllDepthsSkipped";
    case DYNEGA_E_NO_RESULTS: return "NoResults";
    case DYNEGA_E_NUMERIC: return "NumericError";
    case DYNEGA_E_INTERNAL: return "Internal";
    }
    return "Unknown";
}

void dynega_set_log(dynega_log_fn fn, void* user) {
    std::lock_guard lock(log_mutex);
    log_fn = fn;
    log_user = user;
}

void dynega_glla_config_default(dynega_glla_config* cfg) {
    if (!cfg) return;
    const dynega::GllaConfig d;
    *cfg = {d.n, d.tau, d.delta_t, d.max_order, d.use_order};
}

void dynega_sweep_config_default(dynega_sweep_config* cfg) {
    if (!cfg) return;
    const dynega::SweepConfig d;
    cfg->depth_min = d.depth_min;
    cfg->depth_max = d.depth_max;
    cfg->depth_step = d.depth_step;
    dynega_glla_config_default(&cfg->glla);
    cfg->w_nmi = d.weights.w_nmi;
    cfg->w_tefi = d.weights.w_tefi;
    cfg->normalize_nmi = d.normalize_nmi ? 1 : 0;
    cfg->walk_steps = d.walk_steps;
    cfg->threads = 0;
}

void dynega_synthetic_spec_default(dynega_synthetic_spec* spec) {
    if (!spec) return;
    const auto d = dynega::shallow_signal_template();
    spec->n_dimensions = d.n_dimensions;
    spec->total_depth = d.total_depth;
    spec->signal = {d.signal.begin, d.signal.end, d.signal.load};
    spec->secondary = kDefaultSecondary;
    spec->n_secondary = sizeof(kDefaultSecondary) / sizeof(kDefaultSecondary[0]);
    spec->noise_sd = d.noise_sd;
}

dynega_status dynega_pool_load(const char* path, dynega_pool* out) {
    if (!path) return null_arg("path");
    if (!out) return null_arg("out");
    return guarded([&] { *out = new dynega_pool_s{dynega::load_item_pool(path)}; });
}

void dynega_pool_free(dynega_pool pool) { delete pool; }

size_t dynega_pool_size(dynega_pool pool) { return pool ? pool->pool.size() : 0; }

size_t dynega_pool_dimension_count(dynega_pool pool) { return pool ? pool->pool.dimension_names().size() : 0; }

dynega_status dynega_embeddings_load(const char* path, dynega_pool pool, dynega_embeddings* out) {
    if (!path) return null_arg("path");
    if (!pool) return null_arg("pool");
    if (!out) return null_arg("out");
    return guarded([&] { *out = new dynega_embeddings_s{dynega::load_embeddings(path, pool->pool)}; });
}

dynega_status dynega_embeddings_fetch(const dynega_fetch_config* cfg, dynega_pool pool, dynega_embeddings* out,
                                      dynega_fetch_stats* stats) {
    if (!cfg || !cfg->endpoint || !cfg->model || !cfg->api_key) return null_arg("fetch config field");
    if (!pool) return null_arg("pool");
    if (!out) return null_arg("out");
    return guarded([&] {
        dynega::FetchConfig fc;
        fc.endpoint = cfg->endpoint;
        fc.model = cfg->model;
        fc.api_key = cfg->api_key;
        if (cfg->cache_dir && *cfg->cache_dir) fc.cache_dir = cfg->cache_dir;
        if (cfg->batch_size) fc.batch_size = cfg->batch_size;
        if (cfg->max_attempts) fc.max_attempts = cfg->max_attempts;
        if (cfg->backoff_initial_ms > 0) fc.backoff_initial_ms = cfg->backoff_initial_ms;
        fc.log = emit_log;
        dynega::FetchStats st;
        *out = new dynega_embeddings_s{dynega::fetch_embeddings(fc, pool->pool, &st)};
        if (stats) *stats = {st.requests, st.retries, st.cache_hits};
    });
}

dynega_status dynega_embeddings_save(dynega_embeddings emb, const char* path) {
    if (!emb) return null_arg("embeddings");
    if (!path) return null_arg("path");
    return guarded([&] {
        std::filesystem::path p(path);
        if (p.extension() == ".jsonl")
            dynega::save_embeddings_jsonl(emb->matrix, p);
        else
            dynega::save_embeddings_csv(emb->matrix, p);
    });
}

void dynega_embeddings_free(dynega_embeddings emb) { delete emb; }

size_t dynega_embeddings_items(dynega_embeddings emb) { return emb ? emb->matrix.items() : 0; }

size_t dynega_embeddings_depth(dynega_embeddings emb) { return emb ? emb->matrix.depth() : 0; }

dynega_status dynega_sweep(dynega_embeddings emb, dynega_pool truth, const dynega_sweep_config* cfg,
                           dynega_trace* out) {
    if (!emb) return null_arg("embeddings");
    if (!truth) return null_arg("truth pool");
    if (!cfg) return null_arg("config");
    if (!out) return null_arg("out");
    return guarded([&] {
        auto handle = std::make_unique<dynega_trace_s>();
        handle->cfg = to_sweep(*cfg);
        handle->total_depth = emb->matrix.depth();
        handle->trace = dynega::sweep(emb->matrix, truth->pool.truth(), handle->cfg, cfg->threads);
        *out = handle.release();
    });
}

void dynega_trace_free(dynega_trace trace) { delete trace; }

size_t dynega_trace_size(dynega_trace trace) { return trace ? trace->trace.points.size() : 0; }

dynega_status dynega_trace_point(dynega_trace trace, size_t index, dynega_depth_point* out) {
    if (!trace) return null_arg("trace");
    if (!out) return null_arg("out");
    if (index >= trace->trace.points.size()) {
        last_error = "trace index out of range";
        return DYNEGA_E_INVALID_ARGUMENT;
    }
    fill_point(trace->trace.points[index], trace->trace.composite[index], out);
    return DYNEGA_OK;
}

dynega_status dynega_trace_optima(dynega_trace trace, dynega_optimum* nmi_only, dynega_optimum* tefi_only,
                                  dynega_optimum* composite) {
    if (!trace) return null_arg("trace");
    if (nmi_only) *nmi_only = to_c(trace->trace.argmax_nmi);
    if (tefi_only) *tefi_only = to_c(trace->trace.argmin_tefi);
    if (composite) *composite = to_c(trace->trace.composite_opt);
    return DYNEGA_OK;
}

dynega_status dynega_trace_write(dynega_trace trace, const char* out_dir) {
    if (!trace) return null_arg("trace");
    if (!out_dir) return null_arg("out_dir");
    return guarded([&] {
        const std::filesystem::path dir(out_dir);
        std::filesystem::create_directories(dir);
        dynega::write_trace_csv(trace->trace, dir / "trace.csv");
        dynega::write_optima_json(trace->trace, trace->cfg, trace->total_depth, dir / "optima.json");
        dynega::write_landscape_svg(trace->trace, dir / "landscape.svg");
    });
}

dynega_status dynega_ega(dynega_embeddings emb, dynega_pool truth, int walk_steps, const char* out_dir,
                         dynega_depth_point* out) {
    if (!emb) return null_arg("embeddings");
    if (!out) return null_arg("out");
    // fill_point keeps a pointer into the result's reason string
    static thread_local dynega::DepthResult last;
    return guarded([&] {
        std::optional<dynega::Partition> t;
        if (truth) t = truth->pool.truth();
        last = dynega::ega_cross_sectional(emb->matrix, t, walk_steps > 0 ? walk_steps : dynega::kDefaultWalkSteps);
        fill_point(last, std::nullopt, out);
        if (out_dir) {
            const std::filesystem::path dir(out_dir);
            std::filesystem::create_directories(dir);
            dynega::write_file_atomic(dir / "ega.json", dynega::depth_result_json(last, emb->matrix.item_ids()));
        }
    });
}

dynega_status dynega_montecarlo(const dynega_mc_config* cfg, const char* results_dir, dynega_mc_summary* out) {
    if (!cfg) return null_arg("config");
    if (!results_dir) return null_arg("results_dir");
    if (cfg->n_k > 0 && !cfg->k_grid) return null_arg("k_grid");
    return guarded([&] {
        dynega::MonteCarloConfig mc;
        mc.k_grid.assign(cfg->k_grid, cfg->k_grid + cfg->n_k);
        mc.iterations = cfg->iterations;
        mc.base_seed = cfg->base_seed;
        mc.sweep = to_sweep(cfg->sweep);
        mc.threads = cfg->sweep.threads;

        dynega::SyntheticSpec spec;
        spec.n_dimensions = cfg->synthetic.n_dimensions;
        spec.total_depth = cfg->synthetic.total_depth;
        spec.signal = {cfg->synthetic.signal.begin, cfg->synthetic.signal.end, cfg->synthetic.signal.load};
        for (size_t i = 0; i < cfg->synthetic.n_secondary; ++i) {
            const auto& b = cfg->synthetic.secondary[i];
            spec.secondary.push_back({b.begin, b.end, b.load});
        }
        spec.noise_sd = cfg->synthetic.noise_sd;

        const std::size_t total = mc.k_grid.size() * static_cast<std::size_t>(std::max(0, mc.iterations));
        std::size_t done = 0;
        dynega::MonteCarloHooks hooks;
        hooks.on_cell = [&](const dynega::CellSummary& c) {
            ++done;
            std::string msg = "cell k=" + std::to_string(c.k) + " it=" + std::to_string(c.iteration) + " (" +
                              std::to_string(done) + "/" + std::to_string(total) + ")";
            if (!c.ok) msg += " failed: " + c.failure;
            emit_log(msg);
        };
        const auto res = dynega::monte_carlo(mc, spec, std::filesystem::path(results_dir), hooks);
        if (out) {
            out->cells = res.cells.size();
            out->failed = 0;
            for (const auto& c : res.cells) out->failed += c.ok ? 0 : 1;
            out->computed = res.computed;
        }
    });
}

dynega_status dynega_compare(const char* results_dir, const char* out_dir, size_t* rows) {
    if (!results_dir) return null_arg("results_dir");
    if (!out_dir) return null_arg("out_dir");
    return guarded([&] {
        const auto table = dynega::compare_results(results_dir);
        const std::filesystem::path dir(out_dir);
        std::filesystem::create_directories(dir);
        dynega::write_compare_csv(table, dir / "compare.csv");
        dynega::write_compare_svg(table, dir / "compare.svg");
        if (rows) *rows = table.size();
    });
}

dynega_status dynega_vectorfield(const char* results_dir, const dynega_glla_config* glla, const char* out_dir,
                                 size_t* arrows) {
    if (!results_dir) return null_arg("results_dir");
    if (!out_dir) return null_arg("out_dir");
    return guarded([&] {
        dynega::GllaConfig g;
        if (glla) g = to_glla(*glla);
        const auto run = dynega::vector_field_from_results(results_dir, g);
        if (run.skipped_traces)
            emit_log(std::to_string(run.skipped_traces) + " of " + std::to_string(run.traces) +
                     " traces too short for one window; skipped");
        const std::filesystem::path dir(out_dir);
        std::filesystem::create_directories(dir);
        dynega::write_arrows_csv(run.arrows, dir / "arrows.csv");
        dynega::write_vector_field_svg(run.arrows, dir / "vectorfield.svg");
        if (arrows) *arrows = run.arrows.size();
    });
}

dynega_status dynega_sha256_file(const char* path, char* out) {
    if (!path) return null_arg("path");
    if (!out) return null_arg("out");
    return guarded([&] {
        const std::string hex = dynega::sha256_file(path);
        std::copy(hex.begin(), hex.end(), out);
        out[hex.size()] = '\0';
    });
}

} // extern "C"
