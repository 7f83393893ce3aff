#include "dynega/pipeline.hpp"

#include "dynega/error.hpp"
#include "dynega/netfilter.hpp"
#include "dynega/walktrap.hpp"

namespace dynega {

DepthResult estimate_structure(const Eigen::MatrixXd& design, const std::optional<Partition>& truth,
                               int walk_steps) {
    if (truth && truth->size() != static_cast<std::size_t>(design.cols()))
        fail(ErrorCode::LengthMismatch, "truth covers " + std::to_string(truth->size()) + " items, design has " +
                                            std::to_string(design.cols()));
    const CorrMatrix r = correlation_matrix(design);
    const Network net = tmfg(r);
    DepthResult out;
    out.partition = walktrap(net, walk_steps);
    out.n_communities = out.partition.n_communities();
    out.tefi = tefi(r, out.partition);
    if (truth) out.nmi = nmi(out.partition, *truth);
    return out;
}

DepthResult ega_cross_sectional(const EmbeddingMatrix& embeddings, const std::optional<Partition>& truth,
                                int walk_steps) {
    if (embeddings.items() < 4) fail(ErrorCode::TooFewNodes, "cross-sectional EGA needs at least 4 items");
    DepthResult out = estimate_structure(embeddings.values().transpose(), truth, walk_steps);
    out.depth = static_cast<int>(embeddings.depth());
    return out;
}

DepthResult dynega_at_depth(const EmbeddingMatrix& embeddings, int depth, const GllaConfig& cfg,
                            const std::optional<Partition>& truth, int walk_steps) {
    cfg.validate();
    if (depth < 3 || static_cast<std::size_t>(depth) > embeddings.depth())
        fail(ErrorCode::InvalidArgument, "depth " + std::to_string(depth) + " outside [3, " +
                                             std::to_string(embeddings.depth()) + "]");
    if (truth && truth->size() != embeddings.items())
        fail(ErrorCode::LengthMismatch, "truth does not cover every item");
    try {
        DerivativeDesign design = build_derivative_design(embeddings, depth, cfg);
        DepthResult out = estimate_structure(design.values, truth, walk_steps);
        out.depth = depth;
        out.effective_window = design.effective_window;
        return out;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::LengthMismatch) throw;
        DepthResult out;
        out.depth = depth;
        out.status = DepthStatus::Skipped;
        out.skip_reason = std::string(to_string(e.code()));
        return out;
    }
}

} // namespace dynega
