#include "dynega/walktrap.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "dynega/error.hpp"

namespace dynega {

double modularity(const Eigen::MatrixXd& weights, const Partition& partition) {
    const Eigen::Index p = weights.rows();
    if (static_cast<std::size_t>(p) != partition.size())
        fail(ErrorCode::LengthMismatch, "partition size does not match network");
    const Eigen::MatrixXd a = weights.cwiseAbs();
    double total = 0.0;  // sum over ordered pairs, i.e. 2m
    std::vector<double> internal(static_cast<std::size_t>(partition.n_communities()), 0.0);
    std::vector<double> degree_sum(static_cast<std::size_t>(partition.n_communities()), 0.0);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            if (i == j) continue;
            const double w = a(i, j);
            total += w;
            degree_sum[static_cast<std::size_t>(partition[static_cast<std::size_t>(i)])] += w;
            if (partition[static_cast<std::size_t>(i)] == partition[static_cast<std::size_t>(j)])
                internal[static_cast<std::size_t>(partition[static_cast<std::size_t>(i)])] += w;
        }
    }
    if (total <= 0.0) return 0.0;
    double q = 0.0;
    for (std::size_t c = 0; c < internal.size(); ++c) {
        const double share = degree_sum[c] / total;
        q += internal[c] / total - share * share;
    }
    return q;
}

namespace {

bool connected(const Eigen::MatrixXd& a) {
    const Eigen::Index p = a.rows();
    std::vector<char> seen(static_cast<std::size_t>(p), 0);
    std::vector<Eigen::Index> stack{0};
    seen[0] = 1;
    Eigen::Index reached = 1;
    while (!stack.empty()) {
        Eigen::Index u = stack.back();
        stack.pop_back();
        for (Eigen::Index v = 0; v < p; ++v) {
            if (v != u && a(u, v) > 0.0 && !seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = 1;
                ++reached;
                stack.push_back(v);
            }
        }
    }
    return reached == p;
}

struct Community {
    std::vector<int> members;
    Eigen::VectorXd prob;  // mean t-step walk distribution of the members
    bool alive = true;
};

} // namespace

WalktrapResult walktrap_detailed(const Network& net, int steps) {
    if (steps < 1) fail(ErrorCode::InvalidArgument, "walk length must be >= 1");
    const Eigen::Index p = net.size();
    if (p < 1) fail(ErrorCode::TooFewNodes, "empty network");
    Eigen::MatrixXd a = net.weights.cwiseAbs();
    a.diagonal().setZero();

    std::vector<int> degree(static_cast<std::size_t>(p), 0);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j)
            if (j != i && a(i, j) > 0.0) ++degree[static_cast<std::size_t>(i)];
        if (degree[static_cast<std::size_t>(i)] == 0 && p > 1)
            fail(ErrorCode::DisconnectedNetwork, "node " + std::to_string(i) + " has zero strength");
    }
    if (!connected(a)) fail(ErrorCode::DisconnectedNetwork, "network is not connected");

    WalktrapResult result;
    if (p == 1) {
        result.partition = Partition::from_labels({0});
        return result;
    }

    // Self-loops as in the reference implementation: the vertex's mean edge weight.
    Eigen::MatrixXd looped = a;
    for (Eigen::Index i = 0; i < p; ++i)
        looped(i, i) = a.row(i).sum() / degree[static_cast<std::size_t>(i)];
    const Eigen::VectorXd d = looped.rowwise().sum();
    const Eigen::VectorXd inv_d = d.cwiseInverse();
    const Eigen::MatrixXd transition = inv_d.asDiagonal() * looped;

    Eigen::MatrixXd walk = transition;
    for (int s = 1; s < steps; ++s) walk = walk * transition;

    std::vector<Community> comms;
    comms.reserve(static_cast<std::size_t>(2 * p));
    for (Eigen::Index i = 0; i < p; ++i) comms.push_back({{static_cast<int>(i)}, walk.row(i).transpose(), true});

    const double n = static_cast<double>(p);
    auto delta_sigma = [&](int c1, int c2) {
        const auto& x = comms[static_cast<std::size_t>(c1)];
        const auto& y = comms[static_cast<std::size_t>(c2)];
        const double s1 = static_cast<double>(x.members.size());
        const double s2 = static_cast<double>(y.members.size());
        const double r2 = ((x.prob - y.prob).array().square() * inv_d.array()).sum();
        return (s1 * s2 / (s1 + s2)) * r2 / n;
    };

    // Adjacent community pairs keyed (lower id, higher id) with their delta sigma.
    std::map<std::pair<int, int>, double> pairs;
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = i + 1; j < p; ++j)
            if (a(i, j) > 0.0) pairs[{static_cast<int>(i), static_cast<int>(j)}] = delta_sigma(static_cast<int>(i), static_cast<int>(j));

    std::vector<int> labels(static_cast<std::size_t>(p));
    std::iota(labels.begin(), labels.end(), 0);
    Partition best = Partition::from_labels(labels);
    double best_q = modularity(a, best);

    while (!pairs.empty()) {
        // Smallest delta sigma; map order makes the lexicographically smallest pair win ties.
        auto pick = pairs.begin();
        for (auto it = std::next(pairs.begin()); it != pairs.end(); ++it)
            if (it->second < pick->second) pick = it;
        const auto [c1, c2] = pick->first;

        Community merged;
        const auto& x = comms[static_cast<std::size_t>(c1)];
        const auto& y = comms[static_cast<std::size_t>(c2)];
        merged.members = x.members;
        merged.members.insert(merged.members.end(), y.members.begin(), y.members.end());
        const double s1 = static_cast<double>(x.members.size());
        const double s2 = static_cast<double>(y.members.size());
        merged.prob = (s1 * x.prob + s2 * y.prob) / (s1 + s2);
        const int id = static_cast<int>(comms.size());
        comms.push_back(std::move(merged));
        comms[static_cast<std::size_t>(c1)].alive = false;
        comms[static_cast<std::size_t>(c2)].alive = false;

        std::vector<int> neighbours;
        for (auto it = pairs.begin(); it != pairs.end();) {
            auto [u, v] = it->first;
            if (u == c1 || u == c2 || v == c1 || v == c2) {
                int other = (u == c1 || u == c2) ? v : u;
                if (other != c1 && other != c2) neighbours.push_back(other);
                it = pairs.erase(it);
            } else {
                ++it;
            }
        }
        for (int other : neighbours) pairs[{std::min(other, id), std::max(other, id)}] = delta_sigma(other, id);

        for (int m : comms[static_cast<std::size_t>(id)].members) labels[static_cast<std::size_t>(m)] = id;
        Partition level = Partition::from_labels(labels);
        const double q = modularity(a, level);
        if (q >= best_q) {  // >= : ties go to the coarser level
            best_q = q;
            best = std::move(level);
        }
    }
    result.partition = std::move(best);
    result.modularity = best_q;
    return result;
}

} // namespace dynega
