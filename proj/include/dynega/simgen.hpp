#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dynega/ingest.hpp"
#include "dynega/landscape.hpp"
#include "dynega/partition.hpp"

namespace dynega {

// Coordinates [begin, end) carry block structure with the given loading.
struct SignalBand {
    int begin = 0;
    int end = 60;
    double load = 0.75;
};

struct SyntheticSpec {
    int n_dimensions = 5;
    int items_per_dimension = 10;
    int total_depth = 1536;
    SignalBand signal;
    std::vector<SignalBand> secondary;  // optional weaker bands deeper in the vector
    double noise_sd = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

// Strong shallow band plus a weak secondary band; everything else is noise.
SyntheticSpec shallow_signal_template();

struct SyntheticPool {
    EmbeddingMatrix embeddings;
    Partition truth;
};

SyntheticPool generate_synthetic_pool(const SyntheticSpec& spec);

struct MonteCarloConfig {
    std::vector<int> k_grid;  // items per dimension
    int iterations = 500;
    SweepConfig sweep;
    std::uint64_t base_seed = 42;
    unsigned threads = 0;

    void validate() const;
};

std::vector<int> default_k_grid();  // 3..40

std::uint64_t cell_seed(std::uint64_t base_seed, int k, int iteration);

struct CellSummary {
    int k = 0;
    int iteration = 0;
    std::uint64_t seed = 0;
    bool ok = true;
    std::string failure;  // reason when !ok
    Optimum argmax_nmi;
    Optimum argmin_tefi;
    Optimum composite_opt;
    double baseline_nmi = 0.0;
    double baseline_tefi = 0.0;
    int baseline_communities = 0;
};

struct KAggregate {
    int k = 0;
    int cells = 0;
    int failed = 0;
    double mean_depth_nmi = 0.0;
    double mean_depth_tefi = 0.0;
    double mean_depth_composite = 0.0;
    double mean_baseline_nmi = 0.0;
    double mean_optimized_nmi = 0.0;
    double delta = 0.0;
};

struct MCResults {
    std::vector<CellSummary> cells;  // sorted by (k, iteration)
    std::vector<KAggregate> aggregates;
    std::size_t computed = 0;        // cells run in this call (rest resumed from disk)
};

std::vector<KAggregate> aggregate_cells(const std::vector<CellSummary>& cells);

struct MonteCarloHooks {
    std::function<void(const CellSummary&)> on_cell;  // called serially
};

// With `results_dir`, each cell is written as cells/kKKK_itIIII.csv plus an
// aggregate.json; cells whose file already exists are loaded, not recomputed.
MCResults monte_carlo(const MonteCarloConfig& cfg, const SyntheticSpec& spec_template,
                      const std::optional<std::filesystem::path>& results_dir = std::nullopt,
                      const MonteCarloHooks& hooks = {});

} // namespace dynega
