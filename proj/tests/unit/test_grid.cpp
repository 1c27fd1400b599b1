#include "doctest.h"

#include "esa/errors.hpp"
#include "esa/grid.hpp"

#include <cmath>
#include <numbers>

using namespace esa;

TEST_CASE("8x8 grid has the documented first nodes and spacing") {
    const SphericalGrid g = make_grid(8, 8);
    CHECK(g.theta(0) == 0.0);
    CHECK(g.phi(0) == doctest::Approx(std::numbers::pi / 16).epsilon(1e-15));
    CHECK(g.d_theta() == doctest::Approx(std::numbers::pi / 4).epsilon(1e-15));
    CHECK(g.size() == 64);
    CHECK(g.node(3, 2) == 19);
    CHECK(g.column_of(19) == 3);
    CHECK(g.row_of(19) == 2);
}

TEST_CASE("weights are positive and sum to 4 pi at 64x64 within 1e-3") {
    const SphericalGrid g(64, 64);
    CHECK(g.weights().minCoeff() > 0.0);
    const double rel = std::abs(g.weights().sum() - 4 * std::numbers::pi) / (4 * std::numbers::pi);
    CHECK(rel < 1e-3);
}

TEST_CASE("quadrature error decreases monotonically under refinement") {
    double previous = INFINITY;
    for (int n : {16, 32, 64, 128}) {
        const SphericalGrid g(n, n);
        const double err = std::abs(g.weights().sum() - 4 * std::numbers::pi);
        CHECK(err < previous);
        previous = err;
    }
}

TEST_CASE("grids below eight nodes per axis are rejected") {
    CHECK_THROWS_AS(make_grid(4, 4), DimensionError);
    CHECK_THROWS_AS(make_grid(8, 7), DimensionError);
    CHECK_NOTHROW(make_grid(8, 8));
}

TEST_CASE("nodes lie on the unit sphere at the tabulated angles") {
    const SphericalGrid g(12, 10);
    for (int k = 0; k < g.size(); ++k) {
        const double th = g.theta(g.column_of(k)), ph = g.phi(g.row_of(k));
        CHECK(g.nodes()(0, k) == doctest::Approx(std::sin(ph) * std::cos(th)).epsilon(1e-14));
        CHECK(g.nodes()(2, k) == doctest::Approx(std::cos(ph)).epsilon(1e-14));
        CHECK(g.weight(k) == doctest::Approx(std::sin(ph) * g.cell()));
    }
}

TEST_CASE("grid mismatch is reported") {
    CHECK_THROWS_AS(require_same_grid(SphericalGrid(8, 8), SphericalGrid(8, 10), "test"), DimensionError);
    CHECK(SphericalGrid(9, 9) == SphericalGrid(9, 9));
}
