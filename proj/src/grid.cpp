#include "esa/grid.hpp"

#include "esa/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace esa {

SphericalGrid::SphericalGrid(int n_u, int n_v) : n_u_(n_u), n_v_(n_v) {
    if (n_u < kMinNodes || n_v < kMinNodes) {
        throw DimensionError("grid dimensions " + std::to_string(n_u) + "x" + std::to_string(n_v) +
                             " below the minimum of " + std::to_string(kMinNodes) + " per axis");
    }
    d_theta_ = 2.0 * std::numbers::pi / n_u;
    d_phi_ = std::numbers::pi / n_v;

    auto tables = std::make_shared<Tables>();
    tables->sin_phi.resize(n_v);
    for (int j = 0; j < n_v; ++j) tables->sin_phi[j] = std::sin(phi(j));

    const int n = size();
    tables->weights.resize(n);
    tables->nodes.resize(3, n);
    for (int j = 0; j < n_v; ++j) {
        const double sp = tables->sin_phi[j];
        const double cp = std::cos(phi(j));
        for (int i = 0; i < n_u; ++i) {
            const int k = node(i, j);
            tables->weights[k] = sp * cell();
            tables->nodes.col(k) << sp * std::cos(theta(i)), sp * std::sin(theta(i)), cp;
        }
    }
    tables_ = std::move(tables);
}

SphericalGrid make_grid(int n_u, int n_v) { return SphericalGrid(n_u, n_v); }

void require_same_grid(const SphericalGrid& a, const SphericalGrid& b, const char* what) {
    if (!(a == b)) {
        throw DimensionError(std::string(what) + ": grid mismatch (" + std::to_string(a.n_u()) + "x" +
                             std::to_string(a.n_v()) + " vs " + std::to_string(b.n_u()) + "x" +
                             std::to_string(b.n_v()) + ")");
    }
}

} // namespace esa
