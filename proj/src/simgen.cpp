#include "dynega/simgen.hpp"

#include <algorithm>
#include <mutex>
#include <random>
#include <string>

#include "dynega/error.hpp"
#include "dynega/parallel.hpp"
#include "dynega/pipeline.hpp"
#include "dynega/report.hpp"

namespace dynega {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void check_band(const SignalBand& b, int total_depth, const char* what) {
    if (b.begin < 0 || b.end <= b.begin || b.end > total_depth)
        fail(ErrorCode::InvalidArgument, std::string(what) + " band must satisfy 0 <= begin < end <= D");
    if (!(b.load >= 0.0 && b.load < 1.0))
        fail(ErrorCode::InvalidArgument, std::string(what) + " load must lie in [0, 1)");
}

} // namespace

void SyntheticSpec::validate() const {
    if (n_dimensions < 2) fail(ErrorCode::InvalidArgument, "synthetic pools need at least 2 dimensions");
    if (items_per_dimension < 3) fail(ErrorCode::InvalidArgument, "synthetic pools need k >= 3");
    if (total_depth < 3) fail(ErrorCode::InvalidArgument, "synthetic depth must be >= 3");
    if (!(noise_sd > 0.0)) fail(ErrorCode::InvalidArgument, "noise_sd must be > 0");
    check_band(signal, total_depth, "signal");
    for (const auto& b : secondary) check_band(b, total_depth, "secondary");
}

SyntheticSpec shallow_signal_template() {
    SyntheticSpec spec;
    spec.n_dimensions = 5;
    spec.items_per_dimension = 10;
    spec.total_depth = 1536;
    spec.signal = {0, 60, 0.75};
    spec.secondary = {{400, 440, 0.35}};
    spec.noise_sd = 1.0;
    return spec;
}

SyntheticPool generate_synthetic_pool(const SyntheticSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    const int dims = spec.n_dimensions;
    const int k = spec.items_per_dimension;
    const int depth = spec.total_depth;

    // Per-coordinate loading and the dimension centroid drawn for banded coordinates.
    std::vector<double> load(static_cast<std::size_t>(depth), -1.0);
    std::vector<SignalBand> bands{spec.signal};
    bands.insert(bands.end(), spec.secondary.begin(), spec.secondary.end());
    for (const auto& b : bands)
        for (int c = b.begin; c < b.end; ++c) load[static_cast<std::size_t>(c)] = b.load;

    Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(dims, depth);
    for (int g = 0; g < dims; ++g)
        for (int c = 0; c < depth; ++c)
            if (load[static_cast<std::size_t>(c)] >= 0.0) centroids(g, c) = normal(rng);

    Eigen::MatrixXd values(dims * k, depth);
    std::vector<std::string> ids;
    std::vector<int> labels;
    for (int g = 0; g < dims; ++g) {
        for (int j = 0; j < k; ++j) {
            const int row = g * k + j;
            for (int c = 0; c < depth; ++c) {
                const double z = normal(rng);
                const double w = load[static_cast<std::size_t>(c)];
                values(row, c) = w >= 0.0 ? w * centroids(g, c) + (1.0 - w) * z : spec.noise_sd * z;
            }
            ids.push_back("d" + std::to_string(g) + "_i" + std::to_string(j));
            labels.push_back(g);
        }
    }
    return {EmbeddingMatrix(std::move(values), std::move(ids)), Partition::from_labels(labels)};
}

void MonteCarloConfig::validate() const {
    if (k_grid.empty()) fail(ErrorCode::InvalidArgument, "k grid is empty");
    for (int k : k_grid)
        if (k < 3) fail(ErrorCode::InvalidArgument, "every k must be >= 3");
    if (iterations < 1) fail(ErrorCode::InvalidArgument, "iterations must be >= 1");
    sweep.glla.validate();
    sweep.weights.validate();
}

std::vector<int> default_k_grid() {
    std::vector<int> out;
    for (int k = 3; k <= 40; ++k) out.push_back(k);
    return out;
}

std::uint64_t cell_seed(std::uint64_t base_seed, int k, int iteration) {
    std::uint64_t h = splitmix64(base_seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(k)));
    h = splitmix64(h ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(iteration)) << 32));
    return h;
}

std::vector<KAggregate> aggregate_cells(const std::vector<CellSummary>& cells) {
    std::vector<CellSummary> sorted = cells;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return std::tie(a.k, a.iteration) < std::tie(b.k, b.iteration); });
    std::vector<KAggregate> out;
    for (const auto& c : sorted) {
        if (out.empty() || out.back().k != c.k) out.push_back(KAggregate{c.k});
        auto& agg = out.back();
        if (!c.ok) {
            ++agg.failed;
            continue;
        }
        ++agg.cells;
        agg.mean_depth_nmi += c.argmax_nmi.depth;
        agg.mean_depth_tefi += c.argmin_tefi.depth;
        agg.mean_depth_composite += c.composite_opt.depth;
        agg.mean_baseline_nmi += c.baseline_nmi;
        agg.mean_optimized_nmi += c.composite_opt.nmi;
    }
    for (auto& agg : out) {
        if (agg.cells == 0) continue;
        const double n = agg.cells;
        agg.mean_depth_nmi /= n;
        agg.mean_depth_tefi /= n;
        agg.mean_depth_composite /= n;
        agg.mean_baseline_nmi /= n;
        agg.mean_optimized_nmi /= n;
        agg.delta = agg.mean_optimized_nmi - agg.mean_baseline_nmi;
    }
    return out;
}

namespace {

CellRecord run_cell(const MonteCarloConfig& cfg, const SyntheticSpec& spec_template, int k, int iteration) {
    CellRecord rec;
    rec.summary.k = k;
    rec.summary.iteration = iteration;
    rec.summary.seed = cell_seed(cfg.base_seed, k, iteration);
    try {
        SyntheticSpec spec = spec_template;
        spec.items_per_dimension = k;
        spec.seed = rec.summary.seed;
        const SyntheticPool pool = generate_synthetic_pool(spec);
        LandscapeTrace trace = sweep(pool.embeddings, pool.truth, cfg.sweep, 1);
        const DepthResult baseline = ega_cross_sectional(pool.embeddings, pool.truth, cfg.sweep.walk_steps);
        rec.summary.argmax_nmi = trace.argmax_nmi;
        rec.summary.argmin_tefi = trace.argmin_tefi;
        rec.summary.composite_opt = trace.composite_opt;
        rec.summary.baseline_nmi = baseline.nmi.value_or(0.0);
        rec.summary.baseline_tefi = baseline.tefi;
        rec.summary.baseline_communities = baseline.n_communities;
        rec.points = std::move(trace.points);
        rec.composite = std::move(trace.composite);
        for (auto& p : rec.points) p.partition = Partition{};
    } catch (const Error& e) {
        rec.summary.ok = false;
        rec.summary.failure = std::string(to_string(e.code())) + ": " + e.what();
        rec.points.clear();
    }
    return rec;
}

} // namespace

MCResults monte_carlo(const MonteCarloConfig& cfg, const SyntheticSpec& spec_template,
                      const std::optional<std::filesystem::path>& results_dir, const MonteCarloHooks& hooks) {
    cfg.validate();
    SyntheticSpec probe = spec_template;
    probe.items_per_dimension = std::max(3, probe.items_per_dimension);
    probe.validate();
    std::vector<int> ks = cfg.k_grid;
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

    std::vector<std::pair<int, int>> jobs;
    for (int k : ks)
        for (int it = 0; it < cfg.iterations; ++it) jobs.emplace_back(k, it);

    if (results_dir) std::filesystem::create_directories(*results_dir / "cells");

    MCResults results;
    results.cells.resize(jobs.size());
    std::vector<char> computed(jobs.size(), 0);
    std::mutex report_mutex;
    parallel_for(jobs.size(), cfg.threads, [&](std::size_t i) {
        const auto [k, it] = jobs[i];
        CellRecord rec;
        if (results_dir && std::filesystem::exists(cell_path(*results_dir, k, it))) {
            rec = read_cell(cell_path(*results_dir, k, it));
        } else {
            rec = run_cell(cfg, spec_template, k, it);
            computed[i] = 1;
            if (results_dir) write_cell(rec, cell_path(*results_dir, k, it));
        }
        results.cells[i] = rec.summary;
        if (hooks.on_cell) {
            std::lock_guard lock(report_mutex);
            hooks.on_cell(rec.summary);
        }
    });
    results.computed = static_cast<std::size_t>(std::count(computed.begin(), computed.end(), 1));
    results.aggregates = aggregate_cells(results.cells);
    if (results_dir) write_aggregate_json(results, cfg, spec_template, *results_dir / "aggregate.json");
    return results;
}

} // namespace dynega
