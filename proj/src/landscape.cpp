#include "dynega/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dynega/error.hpp"
#include "dynega/parallel.hpp"

namespace dynega {

void CompositeWeights::validate() const {
    if (!(w_nmi >= 0.0 && w_nmi <= 1.0 && w_tefi >= 0.0 && w_tefi <= 1.0))
        fail(ErrorCode::InvalidArgument, "composite weights must lie in [0, 1]");
    if (std::abs(w_nmi + w_tefi - 1.0) > 1e-12)
        fail(ErrorCode::InvalidArgument, "composite weights must sum to 1");
}

std::vector<int> SweepConfig::grid(std::size_t total_depth) const {
    const int d_total = static_cast<int>(total_depth);
    const int hi = depth_max == 0 ? std::min(d_total, kDefaultDepthCap) : depth_max;
    if (depth_min < 3) fail(ErrorCode::InvalidArgument, "depth_min must be >= 3");
    if (depth_step < 1) fail(ErrorCode::InvalidArgument, "depth_step must be >= 1");
    if (hi > d_total)
        fail(ErrorCode::InvalidArgument, "depth_max " + std::to_string(hi) + " exceeds embedding width " +
                                             std::to_string(d_total));
    std::vector<int> out;
    for (int d = depth_min; d <= hi; d += depth_step) out.push_back(d);
    return out;
}

namespace {

struct Range {
    double lo = 0.0;
    double hi = 0.0;
    double scale(double x) const { return hi > lo ? (x - lo) / (hi - lo) : 0.0; }
};

double nmi_of(const DepthResult& r) {
    if (!r.nmi) fail(ErrorCode::InvalidArgument, "composite scoring needs NMI at every ok depth");
    return *r.nmi;
}

} // namespace

std::vector<std::optional<double>> composite_scores(const std::vector<DepthResult>& points,
                                                    const CompositeWeights& w, bool normalize_nmi) {
    w.validate();
    std::optional<Range> nmi_range, tefi_range;
    for (const auto& p : points) {
        if (!p.ok()) continue;
        const double n = nmi_of(p);
        if (!nmi_range) {
            nmi_range = Range{n, n};
            tefi_range = Range{p.tefi, p.tefi};
        }
        nmi_range->lo = std::min(nmi_range->lo, n);
        nmi_range->hi = std::max(nmi_range->hi, n);
        tefi_range->lo = std::min(tefi_range->lo, p.tefi);
        tefi_range->hi = std::max(tefi_range->hi, p.tefi);
    }
    std::vector<std::optional<double>> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!points[i].ok()) continue;
        const double n = normalize_nmi ? nmi_range->scale(nmi_of(points[i])) : nmi_of(points[i]);
        out[i] = w.w_nmi * n - w.w_tefi * tefi_range->scale(points[i].tefi);
    }
    return out;
}

CompositeChoice composite_optimize(const LandscapeTrace& trace, const CompositeWeights& w, bool normalize_nmi) {
    const auto scores = composite_scores(trace.points, w, normalize_nmi);
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!scores[i]) continue;
        if (!best || *scores[i] > *scores[*best] ||
            (*scores[i] == *scores[*best] && trace.points[i].depth < trace.points[*best].depth))
            best = i;
    }
    if (!best) fail(ErrorCode::NoValidPoints, "trace has no ok depths");
    return {trace.points[*best].depth, *scores[*best]};
}

void finalize_trace(LandscapeTrace& trace, const CompositeWeights& w, bool normalize_nmi) {
    trace.weights = w;
    trace.composite = composite_scores(trace.points, w, normalize_nmi);
    std::optional<std::size_t> best_nmi, best_tefi, best_comp;
    auto better = [&](std::optional<std::size_t> cur, std::size_t i, auto key) {
        if (!cur) return true;
        const double a = key(i), b = key(*cur);
        return a > b || (a == b && trace.points[i].depth < trace.points[*cur].depth);
    };
    for (std::size_t i = 0; i < trace.points.size(); ++i) {
        if (!trace.points[i].ok()) continue;
        if (better(best_nmi, i, [&](std::size_t j) { return nmi_of(trace.points[j]); })) best_nmi = i;
        if (better(best_tefi, i, [&](std::size_t j) { return -trace.points[j].tefi; })) best_tefi = i;
        if (better(best_comp, i, [&](std::size_t j) { return *trace.composite[j]; })) best_comp = i;
    }
    if (!best_comp) fail(ErrorCode::AllDepthsSkipped, "every depth in the grid was skipped");
    auto optimum = [&](std::size_t i) {
        return Optimum{trace.points[i].depth, nmi_of(trace.points[i]), trace.points[i].tefi, *trace.composite[i]};
    };
    trace.argmax_nmi = optimum(*best_nmi);
    trace.argmin_tefi = optimum(*best_tefi);
    trace.composite_opt = optimum(*best_comp);
}

LandscapeTrace sweep(const EmbeddingMatrix& embeddings, const Partition& truth, const SweepConfig& cfg,
                     unsigned threads) {
    cfg.glla.validate();
    cfg.weights.validate();
    if (truth.size() != embeddings.items())
        fail(ErrorCode::LengthMismatch, "truth covers " + std::to_string(truth.size()) + " items, embeddings have " +
                                            std::to_string(embeddings.items()));
    const std::vector<int> grid = cfg.grid(embeddings.depth());
    if (grid.empty()) fail(ErrorCode::EmptyGrid, "depth grid is empty");

    LandscapeTrace trace;
    trace.points.resize(grid.size());
    const std::optional<Partition> t = truth;
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        trace.points[i] = dynega_at_depth(embeddings, grid[i], cfg.glla, t, cfg.walk_steps);
    });
    finalize_trace(trace, cfg.weights, cfg.normalize_nmi);
    return trace;
}

std::vector<Arrow> vector_field(const std::vector<TaggedTrace>& traces, const GllaConfig& glla) {
    glla.validate();
    const Eigen::MatrixXd weights = glla_weights(glla.n, glla.delta_t, glla.max_order);
    std::vector<Arrow> arrows;
    for (const auto& tagged : traces) {
        std::vector<const DepthResult*> ok;
        for (const auto& p : tagged.trace->points)
            if (p.ok()) ok.push_back(&p);
        std::sort(ok.begin(), ok.end(), [](auto* a, auto* b) { return a->depth < b->depth; });
        const std::size_t needed = static_cast<std::size_t>((glla.n - 1) * glla.tau + 1);
        if (ok.size() < needed)
            fail(ErrorCode::TraceTooShort, "trace for k=" + std::to_string(tagged.k) + " has " +
                                               std::to_string(ok.size()) + " ok points; needs " +
                                               std::to_string(needed));
        std::vector<double> tefi, nmi, depth;
        for (auto* p : ok) {
            tefi.push_back(p->tefi);
            nmi.push_back(nmi_of(*p));
            depth.push_back(p->depth);
        }
        const Eigen::MatrixXd dt = glla_derivatives(time_delay_embed(tefi, glla.n, glla.tau), weights);
        const Eigen::MatrixXd dn = glla_derivatives(time_delay_embed(nmi, glla.n, glla.tau), weights);
        const Eigen::MatrixXd pos = time_delay_embed(depth, glla.n, glla.tau);
        for (Eigen::Index r = 0; r < dt.rows(); ++r) {
            arrows.push_back({dt(r, 0), dn(r, 0), dt(r, 1), dn(r, 1), tagged.k, pos.row(r).mean()});
        }
    }
    return arrows;
}

} // namespace dynega
