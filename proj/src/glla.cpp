#include "dynega/glla.hpp"

#include <cmath>
#include <string>

#include "dynega/error.hpp"

namespace dynega {

void GllaConfig::validate() const {
    if (tau < 1) fail(ErrorCode::InvalidArgument, "GLLA tau must be >= 1");
    if (!(delta_t > 0.0)) fail(ErrorCode::InvalidArgument, "GLLA delta_t must be > 0");
    if (max_order < 1) fail(ErrorCode::InvalidArgument, "GLLA max_order must be >= 1");
    if (n < max_order + 1)
        fail(ErrorCode::InvalidArgument, "GLLA window n=" + std::to_string(n) +
                                             " cannot support derivative order " +
                                             std::to_string(max_order));
    if (use_order < 1 || use_order > max_order)
        fail(ErrorCode::InvalidArgument, "GLLA use_order must lie in [1, max_order]");
}

Eigen::MatrixXd time_delay_embed(std::span<const double> series, int n, int tau) {
    if (n < 1 || tau < 1) fail(ErrorCode::InvalidArgument, "embedding needs n >= 1 and tau >= 1");
    const long needed = static_cast<long>(n - 1) * tau + 1;
    const long got = static_cast<long>(series.size());
    if (got < needed)
        fail(ErrorCode::SeriesTooShort, "series of length " + std::to_string(got) + " is too short; needed " +
                                            std::to_string(needed));
    const Eigen::Index rows = got - static_cast<long>(n - 1) * tau;
    Eigen::MatrixXd x(rows, n);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (int j = 0; j < n; ++j)
            x(i, j) = series[static_cast<std::size_t>(i + static_cast<Eigen::Index>(j) * tau)];
    return x;
}

Eigen::MatrixXd glla_weights(int n, double delta_t, int max_order) {
    if (max_order < 0) fail(ErrorCode::InvalidArgument, "max_order must be >= 0");
    if (n < max_order + 1)
        fail(ErrorCode::RankDeficient, "window n=" + std::to_string(n) + " gives a rank-deficient basis for order " +
                                           std::to_string(max_order));
    const double centre = (n + 1) / 2.0;
    Eigen::MatrixXd l(n, max_order + 1);
    for (int r = 0; r < n; ++r) {
        const double offset = delta_t * ((r + 1) - centre);
        double term = 1.0;
        for (int a = 0; a <= max_order; ++a) {
            if (a > 0) term *= offset / a;
            l(r, a) = term;
        }
    }
    return l;
}

namespace {

// L (L'L)^-1, i.e. pinv(L)'.
Eigen::MatrixXd derivative_filter(const Eigen::MatrixXd& weights) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(weights);
    if (qr.rank() < weights.cols())
        fail(ErrorCode::SingularNormalEquations, "L'L is singular");
    return qr.solve(Eigen::MatrixXd::Identity(weights.rows(), weights.rows())).transpose();
}

} // namespace

Eigen::MatrixXd glla_derivatives(const Eigen::MatrixXd& embedded, const Eigen::MatrixXd& weights) {
    if (embedded.cols() != weights.rows())
        fail(ErrorCode::InvalidArgument, "embedding width " + std::to_string(embedded.cols()) +
                                             " does not match weight rows " + std::to_string(weights.rows()));
    return embedded * derivative_filter(weights);
}

std::optional<int> effective_window(int depth, const GllaConfig& cfg) {
    int n_eff = std::min(cfg.n, depth - 2);
    while (n_eff >= cfg.max_order + 1 && depth - (n_eff - 1) * cfg.tau < 3) --n_eff;
    if (n_eff < cfg.max_order + 1) return std::nullopt;
    return n_eff;
}

DerivativeDesign build_derivative_design(const EmbeddingMatrix& embeddings, int depth,
                                         const GllaConfig& cfg) {
    cfg.validate();
    if (depth < 1 || static_cast<std::size_t>(depth) > embeddings.depth())
        fail(ErrorCode::InvalidArgument, "depth " + std::to_string(depth) + " outside [1, " +
                                             std::to_string(embeddings.depth()) + "]");
    auto n_eff = effective_window(depth, cfg);
    if (!n_eff) {
        int min_supported = cfg.max_order + 1;
        while (!effective_window(min_supported, cfg)) ++min_supported;
        fail(ErrorCode::DepthTooShallow, "depth " + std::to_string(depth) +
                                             " too shallow; minimum supported depth is " +
                                             std::to_string(min_supported));
    }

    const Eigen::VectorXd filter =
        derivative_filter(glla_weights(*n_eff, cfg.delta_t, cfg.max_order)).col(cfg.use_order);
    const Eigen::Index rows = depth - static_cast<Eigen::Index>(*n_eff - 1) * cfg.tau;
    const Eigen::Index p = static_cast<Eigen::Index>(embeddings.items());

    DerivativeDesign design;
    design.values.resize(rows, p);
    design.depth_used = depth;
    design.effective_window = *n_eff;

    std::vector<double> series(static_cast<std::size_t>(depth));
    for (Eigen::Index item = 0; item < p; ++item) {
        for (int c = 0; c < depth; ++c) series[static_cast<std::size_t>(c)] = embeddings.values()(item, c);
        design.values.col(item) = time_delay_embed(series, *n_eff, cfg.tau) * filter;
    }
    return design;
}

} // namespace dynega
