#include <doctest.h>

#include <cmath>

#include "dynega/glla.hpp"
#include "dynega/pipeline.hpp"
#include "dynega/simgen.hpp"
#include "support.hpp"

using namespace dynega;
using testsupport::error_code;

namespace {

SyntheticPool strong_blocks(std::uint64_t seed, int depth = 300) {
    SyntheticSpec spec;
    spec.n_dimensions = 5;
    spec.items_per_dimension = 6;
    spec.total_depth = depth;
    spec.signal = {0, depth, 0.8};
    spec.seed = seed;
    return generate_synthetic_pool(spec);
}

} // namespace

TEST_SUITE("pipeline") {

TEST_CASE("baseline recovers strong planted blocks") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto pool = strong_blocks(seed);
        const auto r = ega_cross_sectional(pool.embeddings, pool.truth);
        CHECK(r.ok());
        CHECK(r.depth == 300);
        CHECK(r.n_communities == 5);
        REQUIRE(r.nmi.has_value());
        CHECK(*r.nmi == 1.0);
    }
}

TEST_CASE("baseline equals the order-0, single-point window path") {
    // n = 1 and order 0 make the derivative filter the identity, so each
    // design column is the raw coordinate series
    const Eigen::MatrixXd identity_weights = glla_weights(1, 1.0, 0);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SyntheticSpec spec = shallow_signal_template();
        spec.items_per_dimension = 4;
        spec.total_depth = 400;
        spec.secondary.clear();
        spec.seed = seed;
        const auto pool = generate_synthetic_pool(spec);
        const auto& v = pool.embeddings.values();
        Eigen::MatrixXd design(v.cols(), v.rows());
        for (Eigen::Index item = 0; item < v.rows(); ++item) {
            std::vector<double> s(static_cast<std::size_t>(v.cols()));
            for (Eigen::Index c = 0; c < v.cols(); ++c) s[static_cast<std::size_t>(c)] = v(item, c);
            design.col(item) = glla_derivatives(time_delay_embed(s, 1, 1), identity_weights).col(0);
        }
        const auto general = estimate_structure(design, pool.truth);
        const auto baseline = ega_cross_sectional(pool.embeddings, pool.truth);
        CHECK(general.partition == baseline.partition);
        CHECK(general.tefi == doctest::Approx(baseline.tefi).epsilon(1e-12));
    }
}

TEST_CASE("four random items") {
    const Eigen::MatrixXd v = testsupport::gaussian(4, 50, 3);
    const EmbeddingMatrix m(v, {"a", "b", "c", "d"});
    const auto r = ega_cross_sectional(m, std::nullopt);
    CHECK(r.ok());
    CHECK(r.n_communities >= 1);
    CHECK(r.n_communities <= 4);
    CHECK_FALSE(r.nmi.has_value());
    CHECK(std::isfinite(r.tefi));
}

TEST_CASE("duplicate items share a community") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SyntheticSpec spec = shallow_signal_template();
        spec.items_per_dimension = 5;
        spec.seed = seed;
        auto pool = generate_synthetic_pool(spec);
        Eigen::MatrixXd v = pool.embeddings.values();
        const Eigen::Index a = static_cast<Eigen::Index>(seed % 25), b = 24 - a / 2;
        v.row(b) = v.row(a);
        const EmbeddingMatrix dup(v, pool.embeddings.item_ids());
        const auto base = ega_cross_sectional(dup, std::nullopt);
        CHECK(base.partition[static_cast<std::size_t>(a)] == base.partition[static_cast<std::size_t>(b)]);
        const auto dyn = dynega_at_depth(dup, 93, GllaConfig{}, std::nullopt);
        REQUIRE(dyn.ok());
        CHECK(dyn.partition[static_cast<std::size_t>(a)] == dyn.partition[static_cast<std::size_t>(b)]);
    }
}

TEST_CASE("depth results: full depth, too shallow, invalid") {
    const auto pool = strong_blocks(1, 120);
    const auto full = dynega_at_depth(pool.embeddings, 120, GllaConfig{}, pool.truth);
    CHECK(full.ok());
    CHECK(full.depth == 120);
    CHECK(full.effective_window == 5);
    CHECK(std::isfinite(full.tefi));
    CHECK(std::isfinite(*full.nmi));

    const auto shallow = dynega_at_depth(pool.embeddings, 3, GllaConfig{}, pool.truth);
    CHECK_FALSE(shallow.ok());
    CHECK(shallow.skip_reason == "DepthTooShallow");
    CHECK(shallow.depth == 3);

    CHECK(error_code([&] { dynega_at_depth(pool.embeddings, 121, GllaConfig{}, pool.truth); }) ==
          ErrorCode::InvalidArgument);
    CHECK(error_code([&] {
              dynega_at_depth(pool.embeddings, 50, GllaConfig{}, Partition::from_labels({0, 1, 0}));
          }) == ErrorCode::LengthMismatch);
}

TEST_CASE("degenerate items skip the depth instead of failing") {
    Eigen::MatrixXd v = testsupport::gaussian(8, 60, 2);
    v.row(3).head(20).setConstant(1.5);
    std::vector<std::string> ids;
    for (int i = 0; i < 8; ++i) ids.push_back("x" + std::to_string(i));
    const EmbeddingMatrix m(v, ids);
    const auto r = dynega_at_depth(m, 18, GllaConfig{}, std::nullopt);
    CHECK_FALSE(r.ok());
    CHECK(r.skip_reason == "ZeroVarianceColumn");
    CHECK(dynega_at_depth(m, 40, GllaConfig{}, std::nullopt).ok());
}

TEST_CASE("deterministic") {
    const auto pool = strong_blocks(4, 200);
    const auto a = dynega_at_depth(pool.embeddings, 150, GllaConfig{}, pool.truth);
    const auto b = dynega_at_depth(pool.embeddings, 150, GllaConfig{}, pool.truth);
    CHECK(a == b);
    CHECK(ega_cross_sectional(pool.embeddings, pool.truth) == ega_cross_sectional(pool.embeddings, pool.truth));
}

TEST_CASE("shallow signal is found at shallow depth, not deep") {
    int shallow_wins = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        SyntheticSpec spec = shallow_signal_template();
        spec.seed = seed;
        const auto pool = generate_synthetic_pool(spec);
        const auto d53 = dynega_at_depth(pool.embeddings, 53, GllaConfig{}, pool.truth);
        const auto d1053 = dynega_at_depth(pool.embeddings, 1053, GllaConfig{}, pool.truth);
        shallow_wins += d53.ok() && d1053.ok() && *d53.nmi > *d1053.nmi;
    }
    CHECK(shallow_wins >= 45);
}

} // TEST_SUITE
