#pragma once

#include <optional>
#include <vector>

#include "dynega/glla.hpp"
#include "dynega/ingest.hpp"
#include "dynega/pipeline.hpp"

namespace dynega {

struct CompositeWeights {
    double w_nmi = 0.70;
    double w_tefi = 0.30;

    // Both in [0, 1] and summing to 1 within 1e-12.
    void validate() const;
};

struct SweepConfig {
    int depth_min = 3;
    int depth_max = 0;  // 0 resolves to min(D, 1298)
    int depth_step = 5;
    GllaConfig glla;
    CompositeWeights weights;
    bool normalize_nmi = true;  // min-max scale NMI before weighting, like TEFI
    int walk_steps = kDefaultWalkSteps;

    std::vector<int> grid(std::size_t total_depth) const;
};

inline constexpr int kDefaultDepthCap = 1298;

struct Optimum {
    int depth = 0;
    double nmi = 0.0;
    double tefi = 0.0;
    double composite = 0.0;

    friend bool operator==(const Optimum&, const Optimum&) = default;
};

struct LandscapeTrace {
    std::vector<DepthResult> points;             // grid order, ok or skipped
    std::vector<std::optional<double>> composite; // per point; empty for skipped
    CompositeWeights weights;
    Optimum argmax_nmi;
    Optimum argmin_tefi;
    Optimum composite_opt;
};

struct CompositeChoice {
    int depth = 0;
    double value = 0.0;
};

// Composite score per point (nullopt for skipped points).
std::vector<std::optional<double>> composite_scores(const std::vector<DepthResult>& points,
                                                    const CompositeWeights& w, bool normalize_nmi = true);

CompositeChoice composite_optimize(const LandscapeTrace& trace, const CompositeWeights& w,
                                   bool normalize_nmi = true);

// Fills composite scores and the three optima from `trace.points`.
void finalize_trace(LandscapeTrace& trace, const CompositeWeights& w, bool normalize_nmi = true);

LandscapeTrace sweep(const EmbeddingMatrix& embeddings, const Partition& truth, const SweepConfig& cfg,
                     unsigned threads = 0);

struct Arrow {
    double tefi = 0.0;
    double nmi = 0.0;
    double d_tefi = 0.0;
    double d_nmi = 0.0;
    int k = 0;
    double depth_position = 0.0;
};

struct TaggedTrace {
    int k = 0;
    const LandscapeTrace* trace = nullptr;
};

// Windowed local-polynomial derivatives of each trace's (TEFI, NMI) path over
// its ok points, ordered by depth. Position is the order-0 (level) estimate.
std::vector<Arrow> vector_field(const std::vector<TaggedTrace>& traces, const GllaConfig& glla);

} // namespace dynega
