#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "colabel/licl.hpp"
#include "colabel/rng.hpp"
#include "doctest.h"

using namespace colabel;
using geo::OrientedBox3;
using licl::FeatureGrid;
using licl::LiclParams;

namespace {

OrientedBox3 box_at(double x, double y) { return OrientedBox3(x, y, 0.75, 4.0, 2.0, 1.5, 0.0); }

constexpr scene::Extent kExtent{0.0, 100.0, 0.0, 100.0};

FeatureGrid random_grid(std::size_t w, std::size_t h, std::size_t c, rng::Xoshiro256pp& rng) {
    FeatureGrid g = FeatureGrid::zeros(w, h, c, kExtent);
    for (double& v : g.values) v = rng.gaussian();
    return g;
}

struct RandomInstance {
    FeatureGrid grid;
    std::vector<OrientedBox3> pos, neg;
};

RandomInstance random_instance(rng::Xoshiro256pp& rng, bool force_shared_cell = false) {
    RandomInstance inst{random_grid(8, 6, 5, rng), {}, {}};
    const std::size_t m = 1 + rng.uniform_int(4);
    const std::size_t n = 1 + rng.uniform_int(5);
    for (std::size_t i = 0; i < m; ++i) {
        inst.pos.push_back(box_at(rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0)));
    }
    for (std::size_t i = 0; i < n; ++i) {
        inst.neg.push_back(box_at(rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0)));
    }
    if (force_shared_cell) {
        inst.pos.push_back(inst.pos.front());  // two positives, one cell
        inst.neg.push_back(inst.pos.front());  // a negative in a positive's cell
    }
    return inst;
}

/// Independent extended-precision evaluation of both loss variants.
long double loss_ld(const FeatureGrid& grid, const std::vector<OrientedBox3>& pos,
                    const std::vector<OrientedBox3>& neg, const LiclParams& params) {
    const auto feature = [&](const OrientedBox3& b) {
        const auto [ix, iy] = licl::grid_index(b, grid);
        std::vector<long double> f(grid.channels);
        for (std::size_t c = 0; c < grid.channels; ++c) f[c] = grid.at(ix, iy, c);
        if (params.normalize_features) {
            long double norm = 0;
            for (const long double v : f) norm += v * v;
            norm = sqrtl(norm);
            if (norm != 0) {
                for (long double& v : f) v /= norm;
            }
        }
        return f;
    };
    const auto dot = [](const std::vector<long double>& a, const std::vector<long double>& b) {
        long double acc = 0;
        for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
        return acc;
    };
    std::vector<std::vector<long double>> g, h;
    for (const auto& b : pos) g.push_back(feature(b));
    for (const auto& b : neg) h.push_back(feature(b));
    std::vector<long double> sum(grid.channels, 0);
    for (const auto& gm : g) {
        for (std::size_t c = 0; c < grid.channels; ++c) sum[c] += gm[c];
    }
    const long double tau = params.tau;
    const long double m_count = static_cast<long double>(g.size());
    const auto lse = [](const std::vector<long double>& xs) {
        const long double mx = *std::max_element(xs.begin(), xs.end());
        long double acc = 0;
        for (const long double x : xs) acc += expl(x - mx);
        return mx + logl(acc);
    };
    if (!params.textbook_variant) {
        std::vector<long double> b(h.size());
        for (std::size_t i = 0; i < h.size(); ++i) b[i] = dot(sum, h[i]) / tau;
        long double mean_a = 0;
        for (const auto& gm : g) mean_a += dot(gm, sum) / tau;
        return lse(b) - mean_a / m_count;
    }
    long double total = 0;
    for (const auto& gm : g) {
        const long double a = dot(gm, sum) / (m_count * tau);
        std::vector<long double> exps{a};
        for (const auto& hn : h) exps.push_back(dot(gm, hn) / tau);
        total += -a + lse(exps);
    }
    return total / m_count;
}

}  // namespace

TEST_CASE("grid indexing maps centers to cells") {
    FeatureGrid grid = FeatureGrid::zeros(10, 10, 1, kExtent);
    CHECK(licl::grid_index(box_at(50, 50), grid) == std::pair<std::size_t, std::size_t>{5, 5});
    CHECK(licl::grid_index(box_at(0, 0), grid) == std::pair<std::size_t, std::size_t>{0, 0});
    CHECK(licl::grid_index(box_at(100, 100), grid) ==
          std::pair<std::size_t, std::size_t>{9, 9});  // far edge clamps into the last cell
    CHECK(licl::grid_index(box_at(9.999, 10.0), grid) ==
          std::pair<std::size_t, std::size_t>{0, 1});
    CHECK_THROWS_AS(licl::grid_index(box_at(-0.001, 50), grid), licl::OutOfExtent);
    CHECK_THROWS_AS(licl::grid_index(box_at(50, 100.001), grid), licl::OutOfExtent);

    // non-square grid over an asymmetric extent
    FeatureGrid wide = FeatureGrid::zeros(20, 4, 1, {-10.0, 30.0, 0.0, 8.0});
    CHECK(licl::grid_index(box_at(-10, 0), wide) == std::pair<std::size_t, std::size_t>{0, 0});
    CHECK(licl::grid_index(box_at(29.999, 7.999), wide) ==
          std::pair<std::size_t, std::size_t>{19, 3});
}

TEST_CASE("grid indexing satisfies the cell-footprint property") {
    rng::Xoshiro256pp rng(31);
    FeatureGrid grid = FeatureGrid::zeros(13, 7, 1, {-40.0, 40.0, -20.0, 60.0});
    const double cell_w = 80.0 / 13.0;
    const double cell_h = 80.0 / 7.0;
    for (int i = 0; i < 1000; ++i) {
        const OrientedBox3 b = box_at(rng.uniform(-40.0, 40.0), rng.uniform(-20.0, 60.0));
        const auto [ix, iy] = licl::grid_index(b, grid);
        CHECK(ix < grid.width);
        CHECK(iy < grid.height);
        CHECK(b.cx >= -40.0 + ix * cell_w - 1e-9);
        CHECK(b.cx <= -40.0 + (ix + 1) * cell_w + 1e-9);
        CHECK(b.cy >= -20.0 + iy * cell_h - 1e-9);
        CHECK(b.cy <= -20.0 + (iy + 1) * cell_h + 1e-9);
    }
}

TEST_CASE("loss hand case: orthogonal unit features") {
    // One positive with g.g = 1, one negative with g.h = 0, tau = 1:
    // shipped loss = lse({0}) - 1 = -1.
    FeatureGrid grid = FeatureGrid::zeros(2, 1, 2, kExtent);
    grid.at(0, 0, 0) = 1.0;  // g = (1, 0) in cell (0,0)
    grid.at(1, 0, 1) = 1.0;  // h = (0, 1) in cell (1,0)
    LiclParams params;
    params.tau = 1.0;
    params.normalize_features = false;
    const std::vector<OrientedBox3> pos{box_at(10, 25)};  // cell (0,0)
    const std::vector<OrientedBox3> neg{box_at(90, 25)};  // cell (1,0)
    CHECK(licl::licl_loss(grid, pos, neg, params) == doctest::Approx(-1.0).epsilon(1e-12));

    // textbook: a = 1, L = -1 + log(e^1 + e^0)
    params.textbook_variant = true;
    CHECK(licl::licl_loss(grid, pos, neg, params) ==
          doctest::Approx(-1.0 + std::log(std::exp(1.0) + 1.0)).epsilon(1e-12));

    // normalization leaves unit vectors unchanged
    params.textbook_variant = false;
    params.normalize_features = true;
    CHECK(licl::licl_loss(grid, pos, neg, params) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("normalized loss is invariant to feature scale") {
    rng::Xoshiro256pp rng(77);
    const RandomInstance inst = random_instance(rng);
    LiclParams params;  // normalize on
    const double base = licl::licl_loss(inst.grid, inst.pos, inst.neg, params);
    FeatureGrid scaled = inst.grid;
    for (double& v : scaled.values) v *= 37.5;
    CHECK(licl::licl_loss(scaled, inst.pos, inst.neg, params) ==
          doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("loss matches an extended-precision transcription") {
    rng::Xoshiro256pp rng(123);
    for (int trial = 0; trial < 50; ++trial) {
        const RandomInstance inst = random_instance(rng, trial % 5 == 0);
        for (const bool textbook : {false, true}) {
            for (const bool normalize : {false, true}) {
                LiclParams params;
                params.textbook_variant = textbook;
                params.normalize_features = normalize;
                const double got = licl::licl_loss(inst.grid, inst.pos, inst.neg, params);
                const long double ref = loss_ld(inst.grid, inst.pos, inst.neg, params);
                CHECK(std::abs(got - static_cast<double>(ref)) <
                      1e-9 * std::max(1.0, std::abs(got)));
            }
        }
    }
}

TEST_CASE("analytic gradients match finite differences") {
    rng::Xoshiro256pp rng(456);
    const double h = 1e-5;
    for (int trial = 0; trial < 12; ++trial) {
        const RandomInstance inst = random_instance(rng, trial % 3 == 0);
        for (const bool textbook : {false, true}) {
            for (const bool normalize : {false, true}) {
                LiclParams params;
                params.textbook_variant = textbook;
                params.normalize_features = normalize;
                const FeatureGrid grad = licl::licl_grad(inst.grid, inst.pos, inst.neg, params);

                std::vector<bool> touched(inst.grid.values.size(), false);
                for (const auto& boxes : {inst.pos, inst.neg}) {
                    for (const OrientedBox3& b : boxes) {
                        const auto [ix, iy] = licl::grid_index(b, inst.grid);
                        for (std::size_t c = 0; c < inst.grid.channels; ++c) {
                            touched[(c * inst.grid.height + iy) * inst.grid.width + ix] = true;
                        }
                    }
                }
                for (std::size_t i = 0; i < inst.grid.values.size(); ++i) {
                    if (!touched[i]) {
                        CHECK(grad.values[i] == 0.0);  // untouched cells: exactly zero
                        continue;
                    }
                    FeatureGrid bumped = inst.grid;
                    bumped.values[i] = inst.grid.values[i] + h;
                    const double up = licl::licl_loss(bumped, inst.pos, inst.neg, params);
                    bumped.values[i] = inst.grid.values[i] - h;
                    const double down = licl::licl_loss(bumped, inst.pos, inst.neg, params);
                    CHECK(std::abs(grad.values[i] - (up - down) / (2 * h)) < 1e-4);
                }
            }
        }
    }
}

TEST_CASE("normalization makes per-cell gradients orthogonal to the feature") {
    // With distinct cells, each cell's gradient passed through the
    // normalization Jacobian must be orthogonal to its normalized feature.
    FeatureGrid grid = FeatureGrid::zeros(4, 1, 3, kExtent);
    rng::Xoshiro256pp rng(88);
    for (double& v : grid.values) v = rng.gaussian();
    const std::vector<OrientedBox3> pos{box_at(10, 50), box_at(35, 50)};  // cells 0 and 1
    const std::vector<OrientedBox3> neg{box_at(60, 50), box_at(90, 50)};  // cells 2 and 3
    LiclParams params;
    const FeatureGrid grad = licl::licl_grad(grid, pos, neg, params);
    for (std::size_t x = 0; x < 4; ++x) {
        double norm2 = 0.0, dot = 0.0, gmag = 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
            norm2 += grid.at(x, 0, c) * grid.at(x, 0, c);
            dot += grad.at(x, 0, c) * grid.at(x, 0, c);
            gmag += std::abs(grad.at(x, 0, c));
        }
        REQUIRE(gmag > 0.0);
        CHECK(std::abs(dot) / std::sqrt(norm2) < 1e-9);
    }
}

TEST_CASE("loss is invariant to box order") {
    rng::Xoshiro256pp rng(99);
    const RandomInstance inst = random_instance(rng);
    LiclParams params;
    const double base = licl::licl_loss(inst.grid, inst.pos, inst.neg, params);
    std::vector<OrientedBox3> pos = inst.pos;
    std::vector<OrientedBox3> neg = inst.neg;
    std::reverse(pos.begin(), pos.end());
    std::reverse(neg.begin(), neg.end());
    CHECK(licl::licl_loss(inst.grid, pos, neg, params) ==
          doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("log-sum-exp keeps extreme magnitudes finite") {
    rng::Xoshiro256pp rng(111);
    FeatureGrid grid = random_grid(8, 6, 5, rng);
    for (double& v : grid.values) v *= 1e3;
    LiclParams params;
    params.tau = 1e-2;
    params.normalize_features = false;
    const std::vector<OrientedBox3> pos{box_at(10, 10), box_at(50, 50)};
    const std::vector<OrientedBox3> neg{box_at(90, 90), box_at(20, 80)};
    const double loss = licl::licl_loss(grid, pos, neg, params);
    CHECK(std::isfinite(loss));
    const FeatureGrid grad = licl::licl_grad(grid, pos, neg, params);
    for (const double v : grad.values) CHECK(std::isfinite(v));
}

TEST_CASE("zero-feature cells are handled under normalization") {
    FeatureGrid grid = FeatureGrid::zeros(2, 1, 3, kExtent);  // all zeros
    grid.at(1, 0, 0) = 2.0;
    LiclParams params;
    const std::vector<OrientedBox3> pos{box_at(10, 50)};  // zero feature
    const std::vector<OrientedBox3> neg{box_at(90, 50)};
    const double loss = licl::licl_loss(grid, pos, neg, params);
    CHECK(std::isfinite(loss));
    const FeatureGrid grad = licl::licl_grad(grid, pos, neg, params);
    for (const double v : grad.values) CHECK(std::isfinite(v));
    // the zero cell has no normalization direction; its gradient is skipped
    for (std::size_t c = 0; c < 3; ++c) CHECK(grad.at(0, 0, c) == 0.0);
}

TEST_CASE("empty sets are rejected") {
    rng::Xoshiro256pp rng(7);
    FeatureGrid grid = random_grid(4, 4, 2, rng);
    CHECK_THROWS_AS(licl::licl_loss(grid, {}, {box_at(10, 10)}, LiclParams{}), licl::EmptySet);
    CHECK_THROWS_AS(licl::licl_loss(grid, {box_at(10, 10)}, {}, LiclParams{}), licl::EmptySet);
    CHECK_THROWS_AS(licl::licl_grad(grid, {}, {}, LiclParams{}), licl::EmptySet);
}

TEST_CASE("combined objective weights its terms") {
    LiclParams params;  // alpha = beta = gamma = 1
    CHECK(licl::total_loss(1.0, 2.0, 3.0, params) == 6.0);
    params.gamma = 0.0;
    CHECK(licl::total_loss(1.0, 2.0, 3.0, params) == 3.0);
    params.alpha = 2.0;
    params.beta = 0.5;
    params.gamma = 10.0;
    CHECK(licl::total_loss(1.0, 2.0, 3.0, params) == doctest::Approx(33.0).epsilon(1e-12));
}
