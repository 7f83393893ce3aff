#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>

#include "dynega/fitmetrics.hpp"
#include "dynega/glla.hpp"
#include "dynega/ingest.hpp"
#include "dynega/partition.hpp"

namespace dynega {

enum class DepthStatus { Ok, Skipped };

struct DepthResult {
    int depth = 0;
    DepthStatus status = DepthStatus::Ok;
    std::string skip_reason;     // error name when skipped
    Partition partition;
    std::optional<double> nmi;   // only with ground truth
    double tefi = 0.0;
    int n_communities = 0;
    int effective_window = 0;    // 0 for the cross-sectional baseline

    bool ok() const noexcept { return status == DepthStatus::Ok; }
    friend bool operator==(const DepthResult&, const DepthResult&) = default;
};

inline constexpr int kDefaultWalkSteps = 4;

// Correlation -> TMFG -> Walktrap -> TEFI (+ NMI) over the columns of an
// observations x items matrix.
DepthResult estimate_structure(const Eigen::MatrixXd& design, const std::optional<Partition>& truth,
                               int walk_steps = kDefaultWalkSteps);

// Items as variables, all D coordinates as observations.
DepthResult ega_cross_sectional(const EmbeddingMatrix& embeddings, const std::optional<Partition>& truth,
                                int walk_steps = kDefaultWalkSteps);

// DynEGA on the first `depth` coordinates. Data-dependent failures come back
// as a skipped result; only invalid arguments throw.
DepthResult dynega_at_depth(const EmbeddingMatrix& embeddings, int depth, const GllaConfig& cfg,
                            const std::optional<Partition>& truth, int walk_steps = kDefaultWalkSteps);

} // namespace dynega
