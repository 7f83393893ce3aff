#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dynega/landscape.hpp"
#include "dynega/simgen.hpp"

namespace dynega {

// Trace table: depth,status,n_communities,nmi,tefi,composite. Skipped rows
// carry `skipped:<reason>` and empty metric fields.
void write_trace_csv(const LandscapeTrace& trace, const std::filesystem::path& path);
std::string optima_json(const LandscapeTrace& trace, const SweepConfig& cfg, std::size_t total_depth);
void write_optima_json(const LandscapeTrace& trace, const SweepConfig& cfg, std::size_t total_depth,
                       const std::filesystem::path& path);
// NMI and TEFI curves with the three optimum markers.
void write_landscape_svg(const LandscapeTrace& trace, const std::filesystem::path& path);

std::string depth_result_json(const DepthResult& r, const std::vector<std::string>& item_ids);

// Monte Carlo cell files.
struct CellRecord {
    CellSummary summary;
    std::vector<DepthResult> points;  // metrics only; partitions are not persisted
    std::vector<std::optional<double>> composite;
};

std::filesystem::path cell_path(const std::filesystem::path& results_dir, int k, int iteration);
void write_cell(const CellRecord& cell, const std::filesystem::path& path);
CellRecord read_cell(const std::filesystem::path& path);
std::vector<std::filesystem::path> list_cells(const std::filesystem::path& results_dir);
void write_aggregate_json(const MCResults& results, const MonteCarloConfig& cfg, const SyntheticSpec& spec,
                          const std::filesystem::path& path);

struct CompareRow {
    int k = 0;
    int cells = 0;
    double mean_baseline_nmi = 0.0;
    double mean_optimized_nmi = 0.0;
    double delta = 0.0;
};

// Throws NoResults when the directory holds no usable cells.
std::vector<CompareRow> compare_results(const std::filesystem::path& results_dir);
void write_compare_csv(const std::vector<CompareRow>& rows, const std::filesystem::path& path);
void write_compare_svg(const std::vector<CompareRow>& rows, const std::filesystem::path& path);

struct VectorFieldRun {
    std::vector<Arrow> arrows;
    std::size_t traces = 0;
    std::size_t skipped_traces = 0;  // too few ok points for one window
};

VectorFieldRun vector_field_from_results(const std::filesystem::path& results_dir, const GllaConfig& glla);
void write_arrows_csv(const std::vector<Arrow>& arrows, const std::filesystem::path& path);
void write_vector_field_svg(const std::vector<Arrow>& arrows, const std::filesystem::path& path);

// Writes via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

} // namespace dynega
