#include "dynega/netfilter.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "csv.hpp"
#include "dynega/error.hpp"

namespace dynega {

CorrMatrix::CorrMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
    if (values_.rows() != values_.cols())
        fail(ErrorCode::InvalidArgument, "correlation matrix must be square");
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
        if (values_(i, i) != 1.0)
            fail(ErrorCode::InvalidArgument, "correlation matrix diagonal must be exactly 1");
        for (Eigen::Index j = 0; j < i; ++j) {
            if (std::abs(values_(i, j) - values_(j, i)) > 1e-12)
                fail(ErrorCode::NonSymmetric, "correlation matrix is not symmetric");
            if (!(std::abs(values_(i, j)) <= 1.0))
                fail(ErrorCode::InvalidArgument, "correlation outside [-1, 1]");
        }
    }
}

CorrMatrix correlation_matrix(const Eigen::MatrixXd& design) {
    const Eigen::Index m = design.rows();
    const Eigen::Index p = design.cols();
    if (m < 3) fail(ErrorCode::InvalidArgument, "correlation needs at least 3 observations");

    Eigen::MatrixXd centred = design.rowwise() - design.colwise().mean();
    Eigen::VectorXd norms = centred.colwise().norm();
    for (Eigen::Index j = 0; j < p; ++j) {
        const double scale = std::max(1.0, design.col(j).cwiseAbs().maxCoeff());
        if (!(norms(j) > 1e-12 * scale * std::sqrt(static_cast<double>(m))))
            throw Error(ErrorCode::ZeroVarianceColumn,
                        "column " + std::to_string(j) + " has zero variance",
                        ErrorLocation{0, static_cast<std::size_t>(j)});
        centred.col(j) /= norms(j);
    }
    Eigen::MatrixXd r(p, p);
    r.setIdentity();
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = i + 1; j < p; ++j) {
            const double c = std::clamp(centred.col(i).dot(centred.col(j)), -1.0, 1.0);
            r(i, j) = c;
            r(j, i) = c;
        }
    }
    return CorrMatrix(std::move(r));
}

namespace {

using Face = std::array<int, 3>;

Network assemble(const Eigen::MatrixXd& sim, const std::vector<std::pair<int, int>>& pairs,
                 std::vector<int> order) {
    Network net;
    const Eigen::Index p = sim.rows();
    net.weights = Eigen::MatrixXd::Zero(p, p);
    for (auto [a, b] : pairs) {
        int u = std::min(a, b), v = std::max(a, b);
        net.edges.push_back({u, v, sim(u, v)});
        net.weights(u, v) = sim(u, v);
        net.weights(v, u) = sim(u, v);
    }
    std::sort(net.edges.begin(), net.edges.end(),
              [](const Edge& x, const Edge& y) { return std::tie(x.u, x.v) < std::tie(y.u, y.v); });
    net.insertion_order = std::move(order);
    return net;
}

} // namespace

Network tmfg(const CorrMatrix& similarity) {
    const Eigen::Index p = similarity.size();
    if (p < 3) fail(ErrorCode::TooFewNodes, "TMFG needs at least 3 nodes, got " + std::to_string(p));
    const Eigen::MatrixXd& sim = similarity.values();
    const Eigen::MatrixXd a = sim.cwiseAbs();

    if (p == 3) return assemble(sim, {{0, 1}, {0, 2}, {1, 2}}, {0, 1, 2});

    // Seed: the four strongest vertices by off-diagonal |r| row sums; stable
    // sort keeps the lowest index first on ties.
    std::vector<double> strength(static_cast<std::size_t>(p));
    for (Eigen::Index i = 0; i < p; ++i) strength[static_cast<std::size_t>(i)] = a.row(i).sum() - a(i, i);
    std::vector<int> rank(static_cast<std::size_t>(p));
    std::iota(rank.begin(), rank.end(), 0);
    std::stable_sort(rank.begin(), rank.end(), [&](int x, int y) {
        return strength[static_cast<std::size_t>(x)] > strength[static_cast<std::size_t>(y)];
    });
    std::array<int, 4> seed{rank[0], rank[1], rank[2], rank[3]};

    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) pairs.emplace_back(seed[i], seed[j]);
    std::vector<Face> faces{{seed[0], seed[1], seed[2]},
                            {seed[0], seed[1], seed[3]},
                            {seed[0], seed[2], seed[3]},
                            {seed[1], seed[2], seed[3]}};
    std::vector<int> order(seed.begin(), seed.end());

    std::vector<char> inserted(static_cast<std::size_t>(p), 0);
    for (int s : seed) inserted[static_cast<std::size_t>(s)] = 1;

    // Best face per remaining vertex, refreshed incrementally as faces split.
    std::vector<int> best_face(static_cast<std::size_t>(p), -1);
    std::vector<double> best_gain(static_cast<std::size_t>(p), -1.0);
    auto gain = [&](int v, const Face& f) { return a(v, f[0]) + a(v, f[1]) + a(v, f[2]); };
    auto rescan = [&](int v) {
        best_face[static_cast<std::size_t>(v)] = -1;
        best_gain[static_cast<std::size_t>(v)] = -1.0;
        for (std::size_t f = 0; f < faces.size(); ++f) {
            double g = gain(v, faces[f]);
            if (g > best_gain[static_cast<std::size_t>(v)]) {
                best_gain[static_cast<std::size_t>(v)] = g;
                best_face[static_cast<std::size_t>(v)] = static_cast<int>(f);
            }
        }
    };
    for (int v = 0; v < p; ++v)
        if (!inserted[static_cast<std::size_t>(v)]) rescan(v);

    for (Eigen::Index step = 4; step < p; ++step) {
        int chosen = -1;
        for (int v = 0; v < p; ++v) {
            if (inserted[static_cast<std::size_t>(v)]) continue;
            if (chosen < 0 || best_gain[static_cast<std::size_t>(v)] > best_gain[static_cast<std::size_t>(chosen)])
                chosen = v;
        }
        const int fid = best_face[static_cast<std::size_t>(chosen)];
        const Face f = faces[static_cast<std::size_t>(fid)];
        inserted[static_cast<std::size_t>(chosen)] = 1;
        order.push_back(chosen);
        for (int corner : f) pairs.emplace_back(chosen, corner);

        faces[static_cast<std::size_t>(fid)] = {f[0], f[1], chosen};
        const int new_a = static_cast<int>(faces.size());
        faces.push_back({f[1], f[2], chosen});
        faces.push_back({f[0], f[2], chosen});

        for (int v = 0; v < p; ++v) {
            if (inserted[static_cast<std::size_t>(v)]) continue;
            if (best_face[static_cast<std::size_t>(v)] == fid) {
                rescan(v);
                continue;
            }
            // Only the three touched faces changed; lower ids win ties.
            for (int cand : {fid, new_a, new_a + 1}) {
                double g = gain(v, faces[static_cast<std::size_t>(cand)]);
                double cur = best_gain[static_cast<std::size_t>(v)];
                int cur_face = best_face[static_cast<std::size_t>(v)];
                if (g > cur || (g == cur && cand < cur_face)) {
                    best_gain[static_cast<std::size_t>(v)] = g;
                    best_face[static_cast<std::size_t>(v)] = cand;
                }
            }
        }
    }
    return assemble(sim, pairs, std::move(order));
}

Network network_from_weights(const Eigen::MatrixXd& weights) {
    if (weights.rows() != weights.cols()) fail(ErrorCode::InvalidArgument, "weight matrix must be square");
    std::vector<std::pair<int, int>> pairs;
    for (Eigen::Index i = 0; i < weights.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < weights.cols(); ++j) {
            if (std::abs(weights(i, j) - weights(j, i)) > 1e-12)
                fail(ErrorCode::NonSymmetric, "weight matrix is not symmetric");
            if (weights(i, j) != 0.0) pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
        }
    }
    std::vector<int> order(static_cast<std::size_t>(weights.rows()));
    std::iota(order.begin(), order.end(), 0);
    return assemble(weights, pairs, std::move(order));
}

void write_edge_list(const Network& net, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << "u,v,weight\n";
    for (const auto& e : net.edges) out << e.u << ',' << e.v << ',' << csv::format_double(e.weight) << '\n';
}

} // namespace dynega
