#include "esa/diffeo.hpp"

#include "esa/errors.hpp"

#include <Eigen/Geometry>
#include "esa/harmonics.hpp"
#include "esa/kernels.hpp"
#include "esa/rng.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace esa {
namespace {

constexpr int kFlowCount = 5;
constexpr int kRetries = 10;

/// Signed finite-difference area density (gamma_u x gamma_v) . gamma.
Eigen::VectorXd area_density(const SphericalGrid& grid, const Eigen::Matrix3Xd& image) {
    const Partials p = field_partials(grid, image);
    Eigen::VectorXd d(grid.size());
    for (int k = 0; k < grid.size(); ++k) d[k] = p.du.col(k).cross(p.dv.col(k)).dot(image.col(k));
    return d;
}

const Eigen::VectorXd& identity_density(const SphericalGrid& grid) {
    thread_local std::optional<SphericalGrid> cached_grid;
    thread_local Eigen::VectorXd cached;
    if (!cached_grid || !(*cached_grid == grid)) {
        cached_grid = grid;
        cached = area_density(grid, grid.nodes());
    }
    return cached;
}

Eigen::Matrix3Xd normalized_columns(Eigen::Matrix3Xd m) {
    m.colwise().normalize();
    return m;
}

} // namespace

Eigen::VectorXd jacobian_det(const SphericalGrid& grid, const Eigen::Matrix3Xd& image) {
    return area_density(grid, image).cwiseQuotient(identity_density(grid));
}

Diffeo::Diffeo(SphericalGrid grid, Eigen::Matrix3Xd image)
    : grid_(std::move(grid)), image_(std::move(image)) {
    if (image_.cols() != grid_.size()) {
        throw DimensionError("diffeo has " + std::to_string(image_.cols()) + " images, grid needs " +
                             std::to_string(grid_.size()));
    }
    if (!image_.allFinite()) throw NumericalError("diffeo contains non-finite images");
    image_.colwise().normalize();
    jacobian_ = jacobian_det(grid_, image_);
    const double worst = jacobian_.minCoeff();
    if (!(worst > 0.0)) {
        throw OrientationError("reparameterisation is not orientation preserving (min det J = " +
                               std::to_string(worst) + ")");
    }
}

Diffeo identity_diffeo(const SphericalGrid& grid) { return Diffeo(grid, grid.nodes()); }

Diffeo rotation_diffeo(const SphericalGrid& grid, const Eigen::Matrix3d& rotation) {
    return Diffeo(grid, rotation * grid.nodes());
}

Diffeo compose(const Diffeo& g1, const Diffeo& g2) {
    require_same_grid(g1.grid(), g2.grid(), "compose");
    Eigen::Matrix3Xd out;
    kernels::sample_field(g1.grid(), g1.image(), g2.image(), out);
    return Diffeo(g1.grid(), normalized_columns(std::move(out)));
}

Surface pullback(const Surface& f, const Diffeo& gamma) {
    require_same_grid(f.grid(), gamma.grid(), "pullback");
    Eigen::Matrix3Xd out;
    kernels::sample_field(f.grid(), f.points(), gamma.image(), out);
    return Surface(f.grid(), std::move(out));
}

Diffeo random_diffeo(const SphericalGrid& grid, std::uint64_t seed, double magnitude, int max_degree) {
    if (magnitude < 0.0 || !std::isfinite(magnitude)) {
        throw ArgumentError("random_diffeo magnitude must be finite and non-negative");
    }
    if (magnitude == 0.0) return identity_diffeo(grid);

    const TangentBasis basis(max_degree);
    const auto nb = static_cast<std::size_t>(basis.size());
    double scale = magnitude;
    for (int attempt = 0; attempt <= kRetries; ++attempt, scale *= 0.5) {
        Rng rng(seed);
        std::vector<std::vector<double>> flows(kFlowCount, std::vector<double>(nb));
        const double per = scale / std::sqrt(static_cast<double>(nb));
        for (auto& c : flows) {
            for (double& x : c) x = per * rng.normal();
        }
        // gamma = flow_0 o flow_1 o ... o flow_4: the innermost flow acts first.
        Eigen::Matrix3Xd image = grid.nodes();
        for (int k = 0; k < grid.size(); ++k) {
            Eigen::Vector3d p = image.col(k);
            for (int f = kFlowCount - 1; f >= 0; --f) {
                p = (p + basis.combine(flows[static_cast<std::size_t>(f)], p)).normalized();
            }
            image.col(k) = p;
        }
        if (jacobian_det(grid, image).minCoeff() > 0.0) return Diffeo(grid, std::move(image));
    }
    throw OrientationError("random_diffeo: no orientation-preserving draw after " + std::to_string(kRetries) +
                           " halvings of magnitude " + std::to_string(magnitude));
}

double max_displacement(const Diffeo& g) {
    return (g.image() - g.grid().nodes()).colwise().norm().maxCoeff();
}

} // namespace esa
