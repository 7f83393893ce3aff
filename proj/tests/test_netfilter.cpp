#include <doctest.h>

#include <array>
#include <queue>
#include <set>
#include <utility>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/boyer_myrvold_planar_test.hpp>

#include "dynega/netfilter.hpp"
#include "support.hpp"

using namespace dynega;
using testsupport::error_code;

namespace {

using EdgeSet = std::set<std::pair<int, int>>;

EdgeSet edge_set(const Network& net) {
    EdgeSet s;
    for (const auto& e : net.edges) s.insert({e.u, e.v});
    return s;
}

CorrMatrix random_corr(int p, std::uint64_t seed, int samples = 30) {
    return CorrMatrix(testsupport::pearson(testsupport::gaussian(samples, p, seed)));
}

bool planar(const Network& net) {
    using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS>;
    Graph g(static_cast<std::size_t>(net.size()));
    for (const auto& e : net.edges) boost::add_edge(static_cast<std::size_t>(e.u), static_cast<std::size_t>(e.v), g);
    return boost::boyer_myrvold_planarity_test(g);
}

bool connected(const Network& net) {
    const int p = static_cast<int>(net.size());
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(p));
    for (const auto& e : net.edges) {
        adj[static_cast<std::size_t>(e.u)].push_back(e.v);
        adj[static_cast<std::size_t>(e.v)].push_back(e.u);
    }
    std::vector<bool> seen(static_cast<std::size_t>(p), false);
    std::queue<int> q;
    q.push(0);
    seen[0] = true;
    int count = 1;
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int v : adj[static_cast<std::size_t>(u)])
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = true;
                ++count;
                q.push(v);
            }
    }
    return count == p;
}

// Independent greedy construction: brute-force scan of every (vertex, face)
// pair at each step.
EdgeSet greedy_oracle(const Eigen::MatrixXd& r) {
    const int p = static_cast<int>(r.rows());
    const Eigen::MatrixXd a = r.cwiseAbs();
    std::vector<std::pair<double, int>> strength;
    for (int i = 0; i < p; ++i) strength.push_back({a.row(i).sum() - a(i, i), i});
    std::stable_sort(strength.begin(), strength.end(),
                     [](const auto& x, const auto& y) { return x.first > y.first; });
    std::array<int, 4> s{strength[0].second, strength[1].second, strength[2].second, strength[3].second};

    EdgeSet edges;
    auto link = [&](int u, int v) { edges.insert({std::min(u, v), std::max(u, v)}); };
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) link(s[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(j)]);
    std::vector<std::array<int, 3>> faces{{s[0], s[1], s[2]}, {s[0], s[1], s[3]}, {s[0], s[2], s[3]}, {s[1], s[2], s[3]}};
    std::vector<bool> in(static_cast<std::size_t>(p), false);
    for (int v : s) in[static_cast<std::size_t>(v)] = true;

    for (int step = 4; step < p; ++step) {
        double best = -1.0;
        int bv = -1;
        std::size_t bf = 0;
        for (int v = 0; v < p; ++v) {
            if (in[static_cast<std::size_t>(v)]) continue;
            for (std::size_t f = 0; f < faces.size(); ++f) {
                const auto& t = faces[f];
                const double g = a(v, t[0]) + a(v, t[1]) + a(v, t[2]);
                if (g > best) {
                    best = g;
                    bv = v;
                    bf = f;
                }
            }
        }
        const auto t = faces[bf];
        link(bv, t[0]);
        link(bv, t[1]);
        link(bv, t[2]);
        faces[bf] = {t[0], t[1], bv};
        faces.push_back({t[1], t[2], bv});
        faces.push_back({t[0], t[2], bv});
        in[static_cast<std::size_t>(bv)] = true;
    }
    return edges;
}

} // namespace

TEST_SUITE("netfilter") {

TEST_CASE("correlation of identical and negated columns") {
    Eigen::MatrixXd d = testsupport::gaussian(50, 3, 1);
    d.col(1) = d.col(0);
    d.col(2) = -d.col(0);
    const auto r = correlation_matrix(d);
    CHECK(r(0, 1) == 1.0);
    CHECK(r(0, 2) == -1.0);
    CHECK(r(1, 2) == -1.0);
    for (int i = 0; i < 3; ++i) CHECK(r(i, i) == 1.0);
}

TEST_CASE("independent noise is nearly uncorrelated") {
    const auto r = correlation_matrix(testsupport::gaussian(10000, 4, 77));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i != j) CHECK(std::abs(r(i, j)) < 0.05);
}

TEST_CASE("correlation matches a two-pass reference") {
    const Eigen::MatrixXd d = testsupport::gaussian(40, 12, 3) * 1e3 + Eigen::MatrixXd::Constant(40, 12, 5e4);
    const auto r = correlation_matrix(d);
    CHECK((r.values() - testsupport::pearson(d)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(r.values() == r.values().transpose());
}

TEST_CASE("zero-variance column is reported") {
    Eigen::MatrixXd d = testsupport::gaussian(20, 5, 9);
    d.col(3).setConstant(2.0);
    CHECK(error_code([&] { correlation_matrix(d); }) == ErrorCode::ZeroVarianceColumn);
}

TEST_CASE("CorrMatrix validation") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
    m(0, 1) = 0.5;
    CHECK(error_code([&] { CorrMatrix{m}; }) == ErrorCode::NonSymmetric);
    m(1, 0) = 0.5;
    CHECK_NOTHROW(CorrMatrix{m});
    m(2, 2) = 0.9;
    CHECK(error_code([&] { CorrMatrix{m}; }) == ErrorCode::InvalidArgument);
}

TEST_CASE("small networks") {
    CHECK(error_code([] { tmfg(CorrMatrix(Eigen::MatrixXd::Identity(2, 2))); }) == ErrorCode::TooFewNodes);

    const auto tri = tmfg(random_corr(3, 1));
    CHECK(tri.edges.size() == 3);

    const auto k4 = tmfg(random_corr(4, 2));
    CHECK(k4.edges.size() == 6);
    CHECK(edge_set(k4) == EdgeSet{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});

    const auto five = tmfg(random_corr(5, 3));
    CHECK(five.edges.size() == 9);
    CHECK(planar(five));
}

TEST_CASE("inserted vertices join with degree 3") {
    const auto net = tmfg(random_corr(12, 4));
    const auto& order = net.insertion_order;
    REQUIRE(order.size() == 12);
    for (std::size_t k = 4; k < order.size(); ++k) {
        int earlier = 0;
        for (std::size_t j = 0; j < k; ++j) earlier += net.weights(order[k], order[j]) != 0.0;
        CHECK(earlier == 3);
    }
}

TEST_CASE("edge count, planarity and connectivity for p in 4..60") {
    for (int p = 4; p <= 60; ++p) {
        const auto r = random_corr(p, 100 + static_cast<std::uint64_t>(p), 2 * p);
        const auto net = tmfg(r);
        CHECK(net.edges.size() == static_cast<std::size_t>(3 * (p - 2)));
        CHECK(planar(net));
        CHECK(connected(net));
        const auto again = tmfg(r);
        CHECK(again.edges == net.edges);
        CHECK(again.insertion_order == net.insertion_order);
    }
}

TEST_CASE("edge sets agree with the brute-force greedy construction") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto r = random_corr(8, 500 + seed, 12);
        CHECK(edge_set(tmfg(r)) == greedy_oracle(r.values()));
    }
    for (int p : {15, 33}) {
        const auto r = random_corr(p, 900 + static_cast<std::uint64_t>(p), 50);
        CHECK(edge_set(tmfg(r)) == greedy_oracle(r.values()));
    }
}

TEST_CASE("edge weights are the signed correlations") {
    const auto r = random_corr(20, 31);
    const auto net = tmfg(r);
    for (const auto& e : net.edges) {
        CHECK(e.weight == r(e.u, e.v));
        CHECK(net.weights(e.u, e.v) == e.weight);
        CHECK(net.weights(e.v, e.u) == e.weight);
    }
    CHECK(net.weights.diagonal().isZero(0.0));
    int nonzero = 0;
    for (int i = 0; i < 20; ++i)
        for (int j = i + 1; j < 20; ++j) nonzero += net.weights(i, j) != 0.0;
    CHECK(nonzero == 54);
}

TEST_CASE("scaling the similarities keeps the structure") {
    const auto r = random_corr(25, 41);
    Eigen::MatrixXd scaled = r.values() * 0.37;
    scaled.diagonal().setOnes();
    const auto a = tmfg(r), b = tmfg(CorrMatrix(scaled));
    CHECK(edge_set(a) == edge_set(b));
    CHECK(a.insertion_order == b.insertion_order);
}

TEST_CASE("ties resolve to the lowest index") {
    Eigen::MatrixXd eq = Eigen::MatrixXd::Constant(7, 7, 0.5);
    eq.diagonal().setOnes();
    const auto net = tmfg(CorrMatrix(eq));
    CHECK(net.insertion_order == std::vector<int>{0, 1, 2, 3, 4, 5, 6});
    CHECK(edge_set(net) == greedy_oracle(eq));
}

TEST_CASE("edge list dump") {
    testsupport::TempDir dir;
    const auto net = tmfg(random_corr(5, 8));
    write_edge_list(net, dir / "edges.csv");
    const auto text = testsupport::slurp(dir / "edges.csv");
    CHECK(text.rfind("u,v,weight\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 10);
}

TEST_CASE("network from arbitrary weights") {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 4);
    w(0, 1) = w(1, 0) = 0.5;
    w(2, 3) = w(3, 2) = -0.25;
    const auto net = network_from_weights(w);
    CHECK(net.edges.size() == 2);
    CHECK(net.edges[1] == Edge{2, 3, -0.25});
}

} // TEST_SUITE
