#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "dynega/landscape.hpp"
#include "dynega/simgen.hpp"
#include "support.hpp"

using namespace dynega;
using testsupport::error_code;

namespace {

DepthResult point(int depth, double nmi, double tefi) {
    DepthResult r;
    r.depth = depth;
    r.nmi = nmi;
    r.tefi = tefi;
    r.n_communities = 1;
    return r;
}

DepthResult skipped(int depth) {
    DepthResult r;
    r.depth = depth;
    r.status = DepthStatus::Skipped;
    r.skip_reason = "DepthTooShallow";
    return r;
}

LandscapeTrace random_trace(std::mt19937_64& rng, int n_points, bool with_skips = true) {
    std::uniform_real_distribution<double> nmi(0.0, 1.0), tefi(-30.0, 0.0), coin(0.0, 1.0);
    LandscapeTrace t;
    for (int i = 0; i < n_points; ++i) {
        const int depth = 3 + 5 * i;
        if (with_skips && coin(rng) < 0.1)
            t.points.push_back(skipped(depth));
        else
            t.points.push_back(point(depth, std::round(nmi(rng) * 20) / 20, tefi(rng)));
    }
    t.points.push_back(point(3 + 5 * n_points, 0.5, -10.0));  // at least one ok point
    return t;
}

const DepthResult& at_depth(const LandscapeTrace& t, int depth) {
    return *std::find_if(t.points.begin(), t.points.end(), [&](const DepthResult& p) { return p.depth == depth; });
}

// Least-squares slope and level at the centre of a window of equally spaced points.
std::pair<double, double> line_fit(const std::vector<double>& y) {
    const int n = static_cast<int>(y.size());
    const double c = (n - 1) / 2.0;
    double sxy = 0.0, sxx = 0.0, mean = 0.0;
    for (int i = 0; i < n; ++i) mean += y[static_cast<std::size_t>(i)] / n;
    for (int i = 0; i < n; ++i) {
        sxy += (i - c) * (y[static_cast<std::size_t>(i)] - mean);
        sxx += (i - c) * (i - c);
    }
    return {sxy / sxx, mean};
}

} // namespace

TEST_SUITE("landscape") {

TEST_CASE("default grid has 260 depths") {
    const SweepConfig cfg;
    const auto g = cfg.grid(1536);
    CHECK(g.size() == 260);
    CHECK(g.front() == 3);
    CHECK(g.back() == 1298);
    CHECK(cfg.grid(500).back() == 498);

    SweepConfig bad;
    bad.depth_min = 2;
    CHECK(error_code([&] { bad.grid(100); }) == ErrorCode::InvalidArgument);
    bad = SweepConfig{};
    bad.depth_step = 0;
    CHECK(error_code([&] { bad.grid(100); }) == ErrorCode::InvalidArgument);
    bad = SweepConfig{};
    bad.depth_max = 101;
    CHECK(error_code([&] { bad.grid(100); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("weight validation") {
    CHECK_NOTHROW(CompositeWeights{}.validate());
    CHECK_NOTHROW((CompositeWeights{1.0, 0.0}.validate()));
    CHECK(error_code([] { CompositeWeights{0.7, 0.4}.validate(); }) == ErrorCode::InvalidArgument);
    CHECK(error_code([] { CompositeWeights{1.2, -0.2}.validate(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("pure weights reduce to the single-metric optima") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        auto t = random_trace(rng, 40);
        finalize_trace(t, CompositeWeights{});
        CHECK(composite_optimize(t, {1.0, 0.0}).depth == t.argmax_nmi.depth);
        CHECK(composite_optimize(t, {0.0, 1.0}).depth == t.argmin_tefi.depth);
        CHECK(composite_optimize(t, {1.0, 0.0}, false).depth == t.argmax_nmi.depth);
    }
}

TEST_CASE("equal composites resolve to the smallest depth") {
    LandscapeTrace t;
    // NMI and TEFI rise together so 0.5*NMI_n - 0.5*TEFI_n is 0 everywhere
    t.points = {point(48, 0.9, -1.0), point(13, 0.1, -9.0), skipped(8), point(28, 0.5, -5.0)};
    const auto choice = composite_optimize(t, {0.5, 0.5});
    CHECK(choice.depth == 13);
    CHECK(choice.value == 0.0);

    LandscapeTrace flat;
    flat.points = {point(40, 0.7, -3.0), point(20, 0.7, -3.0), point(30, 0.7, -3.0)};
    finalize_trace(flat, CompositeWeights{});
    CHECK(flat.argmax_nmi.depth == 20);
    CHECK(flat.argmin_tefi.depth == 20);
    CHECK(flat.composite_opt.depth == 20);
    // constant metrics normalise to 0
    for (const auto& c : flat.composite) CHECK(*c == 0.0);
}

TEST_CASE("composite formula with min-max scaling") {
    LandscapeTrace t;
    t.points = {point(10, 0.2, -20.0), point(20, 0.6, -10.0), point(30, 1.0, 0.0), skipped(5)};
    const auto s = composite_scores(t.points, {0.7, 0.3});
    CHECK(*s[0] == doctest::Approx(0.0));
    CHECK(*s[1] == doctest::Approx(0.7 * 0.5 - 0.3 * 0.5));
    CHECK(*s[2] == doctest::Approx(0.7 - 0.3));
    CHECK_FALSE(s[3].has_value());
    const auto raw = composite_scores(t.points, {0.7, 0.3}, false);
    CHECK(*raw[0] == doctest::Approx(0.7 * 0.2));
    CHECK(*raw[1] == doctest::Approx(0.7 * 0.6 - 0.3 * 0.5));
}

TEST_CASE("single valid depth sets all optima") {
    LandscapeTrace t;
    t.points = {skipped(3), skipped(8), point(13, 0.4, -2.0)};
    finalize_trace(t, CompositeWeights{});
    CHECK(t.argmax_nmi.depth == 13);
    CHECK(t.argmin_tefi.depth == 13);
    CHECK(t.composite_opt.depth == 13);
}

TEST_CASE("no ok points") {
    LandscapeTrace t;
    t.points = {skipped(3), skipped(8)};
    CHECK(error_code([&] { composite_optimize(t, CompositeWeights{}); }) == ErrorCode::NoValidPoints);
    CHECK(error_code([&] { finalize_trace(t, CompositeWeights{}); }) == ErrorCode::AllDepthsSkipped);
}

TEST_CASE("positive affine rescaling of TEFI leaves the choice unchanged") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        auto t = random_trace(rng, 30);
        auto u = t;
        for (auto& p : u.points) p.tefi = 3.7 * p.tefi - 12.0;
        for (double w : {0.1, 0.3, 0.7, 0.9})
            CHECK(composite_optimize(t, {w, 1.0 - w}).depth == composite_optimize(u, {w, 1.0 - w}).depth);
    }
}

TEST_CASE("selected NMI never drops as the NMI weight grows") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const auto t = random_trace(rng, 50);
        double last = -1.0;
        for (int step = 0; step <= 100; ++step) {
            const double w = step / 100.0;
            const int d = composite_optimize(t, {w, 1.0 - w}).depth;
            const double n = *at_depth(t, d).nmi;
            CHECK(n >= last);
            last = n;
        }
    }
}

TEST_CASE("sweep covers the grid and is independent of evaluation order") {
    SyntheticSpec spec = shallow_signal_template();
    spec.items_per_dimension = 5;
    spec.total_depth = 300;
    spec.secondary.clear();
    spec.seed = 21;
    const auto pool = generate_synthetic_pool(spec);

    SweepConfig cfg;
    cfg.depth_max = 300;
    cfg.depth_step = 15;
    const auto serial = sweep(pool.embeddings, pool.truth, cfg, 1);
    const auto parallel = sweep(pool.embeddings, pool.truth, cfg, 4);
    const auto grid = cfg.grid(300);
    REQUIRE(serial.points.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(serial.points[i].depth == grid[i]);
    CHECK(serial.points == parallel.points);
    CHECK(serial.composite == parallel.composite);
    CHECK(serial.composite_opt == parallel.composite_opt);

    LandscapeTrace reversed;
    for (auto it = grid.rbegin(); it != grid.rend(); ++it)
        reversed.points.push_back(dynega_at_depth(pool.embeddings, *it, cfg.glla, pool.truth));
    std::reverse(reversed.points.begin(), reversed.points.end());
    finalize_trace(reversed, cfg.weights);
    CHECK(reversed.points == serial.points);
    CHECK(reversed.composite_opt == serial.composite_opt);

    CHECK_FALSE(serial.points.front().ok());  // depth 3
    CHECK(serial.argmax_nmi.depth < serial.argmin_tefi.depth);
}

TEST_CASE("sweep errors") {
    SyntheticSpec spec = shallow_signal_template();
    spec.items_per_dimension = 3;
    spec.total_depth = 100;
    spec.secondary.clear();
    const auto pool = generate_synthetic_pool(spec);
    SweepConfig cfg;
    cfg.depth_min = 50;
    cfg.depth_max = 40;
    CHECK(error_code([&] { sweep(pool.embeddings, pool.truth, cfg); }) == ErrorCode::EmptyGrid);
    cfg.depth_min = 3;
    cfg.depth_max = 4;
    CHECK(error_code([&] { sweep(pool.embeddings, pool.truth, cfg); }) == ErrorCode::AllDepthsSkipped);
    cfg.depth_max = 100;
    cfg.weights = {0.5, 0.6};
    CHECK(error_code([&] { sweep(pool.embeddings, pool.truth, cfg); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("vector field of constant and linear traces") {
    LandscapeTrace flat, ramp;
    for (int i = 0; i < 12; ++i) {
        flat.points.push_back(point(8 + 5 * i, 0.6, -4.0));
        ramp.points.push_back(point(8 + 5 * i, 0.05 * i, -4.0));
    }
    const GllaConfig glla;
    const auto a = vector_field({{5, &flat}}, glla);
    REQUIRE(a.size() == 8);
    for (const auto& arrow : a) {
        CHECK(std::abs(arrow.d_tefi) < 1e-12);
        CHECK(std::abs(arrow.d_nmi) < 1e-12);
        CHECK(arrow.k == 5);
    }
    const auto b = vector_field({{7, &ramp}}, glla);
    REQUIRE(b.size() == 8);
    for (std::size_t i = 0; i < b.size(); ++i) {
        CHECK(std::abs(b[i].d_tefi) < 1e-12);
        CHECK(b[i].d_nmi == doctest::Approx(0.05).epsilon(1e-10));
        CHECK(b[i].nmi == doctest::Approx(0.05 * (static_cast<double>(i) + 2)).epsilon(1e-10));
        CHECK(b[i].depth_position == doctest::Approx(8 + 5 * (static_cast<double>(i) + 2)));
    }
}

TEST_CASE("vector field: window counts and least-squares slopes") {
    std::mt19937_64 rng(17);
    std::vector<LandscapeTrace> traces;
    for (int k = 3; k <= 12; ++k) traces.push_back(random_trace(rng, 20 + k));
    std::vector<TaggedTrace> tagged;
    std::size_t expected = 0;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        tagged.push_back({static_cast<int>(i) + 3, &traces[i]});
        std::size_t ok = 0;
        for (const auto& p : traces[i].points) ok += p.ok();
        expected += ok - 4;
    }
    GllaConfig glla;
    glla.max_order = 1;  // order-1 basis: the slope is the plain least-squares line
    const auto arrows = vector_field(tagged, glla);
    CHECK(arrows.size() == expected);

    std::size_t offset = 0;
    for (const auto& t : tagged) {
        std::vector<double> nmi, tefi;
        for (const auto& p : t.trace->points)
            if (p.ok()) {
                nmi.push_back(*p.nmi);
                tefi.push_back(p.tefi);
            }
        for (std::size_t w = 0; w + 5 <= nmi.size(); ++w) {
            const auto [sn, ln] = line_fit({nmi.begin() + static_cast<long>(w), nmi.begin() + static_cast<long>(w) + 5});
            const auto [st, lt] = line_fit({tefi.begin() + static_cast<long>(w), tefi.begin() + static_cast<long>(w) + 5});
            const auto& a = arrows[offset + w];
            CHECK(a.k == t.k);
            CHECK(a.d_nmi == doctest::Approx(sn).epsilon(1e-9));
            CHECK(a.d_tefi == doctest::Approx(st).epsilon(1e-9));
            CHECK(a.nmi == doctest::Approx(ln).epsilon(1e-9));
            CHECK(a.tefi == doctest::Approx(lt).epsilon(1e-9));
        }
        offset += nmi.size() - 4;
    }
}

TEST_CASE("vector field needs one full window") {
    LandscapeTrace t;
    t.points = {point(8, 0.1, -1.0), point(13, 0.2, -2.0), skipped(18), point(23, 0.3, -3.0), point(28, 0.3, -3.0)};
    CHECK(error_code([&] { vector_field({{4, &t}}, GllaConfig{}); }) == ErrorCode::TraceTooShort);
    t.points.push_back(point(33, 0.2, -1.0));
    CHECK(vector_field({{4, &t}}, GllaConfig{}).size() == 1);
}

} // TEST_SUITE
