#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "dynega/fitmetrics.hpp"
#include "dynega/netfilter.hpp"
#include "dynega/walktrap.hpp"
#include "support.hpp"

using namespace dynega;
using testsupport::error_code;

namespace {

double newman(const Eigen::MatrixXd& w, const std::vector<int>& labels) {
    Eigen::MatrixXd a = w.cwiseAbs();
    a.diagonal().setZero();
    const Eigen::VectorXd k = a.rowwise().sum();
    const double two_m = k.sum();
    double q = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)])
                q += a(i, j) - k(i) * k(j) / two_m;
    return q / two_m;
}

Eigen::MatrixXd two_cliques(double bridge) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(10, 10);
    for (int b = 0; b < 2; ++b)
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j)
                if (i != j) w(5 * b + i, 5 * b + j) = 1.0;
    w(4, 5) = w(5, 4) = bridge;
    return w;
}

Eigen::MatrixXd planted(const std::vector<int>& labels, double within, double between, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.03, 0.03);
    const int p = static_cast<int>(labels.size());
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j)
            w(i, j) = w(j, i) =
                (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)] ? within : between) +
                jitter(rng);
    return w;
}

std::vector<int> shuffled_labels(int blocks, int size, std::uint64_t seed) {
    auto labels = testsupport::block_labels(blocks, size);
    std::mt19937_64 rng(seed);
    std::shuffle(labels.begin(), labels.end(), rng);
    return labels;
}

} // namespace

TEST_SUITE("walktrap") {

TEST_CASE("two bridged cliques split exactly as exhaustive modularity search says") {
    const auto w = two_cliques(0.01);
    // every 2-partition of 10 nodes, node 0 fixed in block 0
    double best = -1.0;
    std::vector<int> best_labels;
    for (int mask = 1; mask < (1 << 9); ++mask) {
        std::vector<int> labels(10, 0);
        for (int b = 0; b < 9; ++b) labels[static_cast<std::size_t>(b + 1)] = (mask >> b) & 1;
        const double q = newman(w, labels);
        if (q > best) {
            best = q;
            best_labels = labels;
        }
    }
    const auto found = walktrap_detailed(network_from_weights(w));
    CHECK(found.partition == Partition::from_labels(best_labels));
    CHECK(found.partition.n_communities() == 2);
    CHECK(found.modularity == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("complete graph with equal weights stays whole") {
    for (int n : {4, 7, 12}) {
        Eigen::MatrixXd w = Eigen::MatrixXd::Constant(n, n, 0.6);
        w.diagonal().setZero();
        const auto part = walktrap(network_from_weights(w));
        CHECK(part.n_communities() == 1);
    }
}

TEST_CASE("planted three-block networks are recovered") {
    int perfect = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto labels = shuffled_labels(3, 5, seed);
        const auto part = walktrap(network_from_weights(planted(labels, 0.9, 0.05, seed + 1000)));
        perfect += nmi(part, Partition::from_labels(labels)) == 1.0;
    }
    CHECK(perfect == 20);
}

TEST_CASE("planted blocks through correlation and TMFG") {
    int perfect = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto labels = testsupport::block_labels(3, 5);
        const CorrMatrix r(testsupport::block_correlation(labels, 0.8, 300, seed));
        perfect += nmi(walktrap(tmfg(r)), Partition::from_labels(labels)) == 1.0;
    }
    CHECK(perfect >= 18);
}

TEST_CASE("relabelling nodes permutes the partition") {
    const auto labels = shuffled_labels(3, 6, 5);
    const auto w = planted(labels, 0.7, 0.2, 17);
    std::vector<int> perm(labels.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(3);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd wp(w.rows(), w.cols());
    for (int i = 0; i < w.rows(); ++i)
        for (int j = 0; j < w.cols(); ++j) wp(i, j) = w(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    const auto a = walktrap(network_from_weights(w));
    const auto b = walktrap(network_from_weights(wp));
    std::vector<int> mapped(labels.size());
    for (std::size_t i = 0; i < perm.size(); ++i) mapped[i] = a[static_cast<std::size_t>(perm[i])];
    CHECK(Partition::from_labels(mapped) == b);
}

TEST_CASE("weight scale and sign do not matter") {
    const auto labels = shuffled_labels(4, 5, 8);
    const auto w = planted(labels, 0.6, 0.15, 23);
    const auto base = walktrap_detailed(network_from_weights(w));
    for (double c : {1e-3, 0.5, 7.0, 1e4}) {
        const auto scaled = walktrap_detailed(network_from_weights(w * c));
        CHECK(scaled.partition == base.partition);
        CHECK(scaled.modularity == doctest::Approx(base.modularity).epsilon(1e-9));
    }
    CHECK(walktrap(network_from_weights(-w)) == base.partition);
}

TEST_CASE("chosen cut is at least as modular as the trivial partition") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const CorrMatrix r(testsupport::pearson(testsupport::gaussian(25, 14, seed)));
        const auto net = tmfg(r);
        const auto res = walktrap_detailed(net);
        const double trivial = modularity(net.weights, Partition::from_labels(std::vector<int>(14, 0)));
        CHECK(trivial == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(res.modularity >= trivial - 1e-12);
        CHECK(res.modularity == doctest::Approx(modularity(net.weights, res.partition)).epsilon(1e-12));
    }
}

TEST_CASE("modularity matches the textbook formula") {
    const auto w = planted(shuffled_labels(3, 4, 1), 0.8, 0.1, 2);
    const auto labels = shuffled_labels(3, 4, 9);
    CHECK(modularity(w, Partition::from_labels(labels)) == doctest::Approx(newman(w, labels)).epsilon(1e-12));
}

TEST_CASE("deterministic") {
    const CorrMatrix r(testsupport::pearson(testsupport::gaussian(30, 20, 4)));
    const auto net = tmfg(r);
    const auto a = walktrap_detailed(net), b = walktrap_detailed(net);
    CHECK(a.partition == b.partition);
    CHECK(a.modularity == b.modularity);
}

TEST_CASE("step count changes nothing on clear structure") {
    const auto labels = shuffled_labels(3, 5, 44);
    const auto net = network_from_weights(planted(labels, 0.9, 0.05, 45));
    for (int t : {1, 2, 3, 4, 6, 10}) CHECK(nmi(walktrap(net, t), Partition::from_labels(labels)) == 1.0);
}

TEST_CASE("foreign inputs are rejected") {
    Eigen::MatrixXd iso = two_cliques(0.5);
    iso.row(9).setZero();
    iso.col(9).setZero();
    CHECK(error_code([&] { walktrap(network_from_weights(iso)); }).has_value());
    CHECK(error_code([] { walktrap(network_from_weights(two_cliques(0.0))); }) == ErrorCode::DisconnectedNetwork);
    CHECK(error_code([] { walktrap(network_from_weights(two_cliques(0.5)), 0); }) == ErrorCode::InvalidArgument);
}

} // TEST_SUITE
