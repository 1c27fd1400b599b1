#include "esa/srnf.hpp"

#include "esa/errors.hpp"
#include "esa/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace esa {

SrnfField::SrnfField(SphericalGrid grid, Eigen::Matrix3Xd q) : grid_(std::move(grid)), q_(std::move(q)) {
    if (q_.cols() != grid_.size()) {
        throw DimensionError("SRNF has " + std::to_string(q_.cols()) + " vectors, grid needs " +
                             std::to_string(grid_.size()));
    }
}

SrnfField srnf(const Surface& f) {
    const NormalField n = normal_field(f);
    Eigen::Matrix3Xd q(3, f.grid().size());
    for (int k = 0; k < f.grid().size(); ++k) {
        const double mag = n.vectors.col(k).norm();
        q.col(k) = n.vectors.col(k) / std::sqrt(std::max(mag, kNormalFloor));
    }
    return SrnfField(f.grid(), std::move(q));
}

SrnfField srnf_action(const SrnfField& q, const Eigen::Matrix3Xd& image, const Eigen::VectorXd& area_ratio) {
    const SphericalGrid& g = q.grid();
    if (image.cols() != g.size() || area_ratio.size() != g.size()) {
        throw DimensionError("srnf_action: map does not match the SRNF grid");
    }
    // q / sqrt(sin phi) is the SRNF relative to the sphere's area element.
    Eigen::Matrix3Xd smooth(3, g.size());
    for (int k = 0; k < g.size(); ++k) smooth.col(k) = q.q().col(k) / std::sqrt(g.sin_phi(g.row_of(k)));

    Eigen::Matrix3Xd out;
    kernels::sample_field(g, smooth, image, out);
    for (int k = 0; k < g.size(); ++k) {
        const double j = area_ratio[k];
        if (!(j > 0.0)) {
            throw OrientationError("srnf_action: non-positive Jacobian " + std::to_string(j) + " at node " +
                                   std::to_string(k));
        }
        out.col(k) *= std::sqrt(j * g.sin_phi(g.row_of(k)));
    }
    return SrnfField(g, std::move(out));
}

SrnfField srnf_action(const SrnfField& q, const Diffeo& gamma) {
    require_same_grid(q.grid(), gamma.grid(), "srnf_action");
    return srnf_action(q, gamma.image(), gamma.jacobian());
}

SrnfField rotate(const SrnfField& q, const Eigen::Matrix3d& rotation) {
    return SrnfField(q.grid(), rotation * q.q());
}

double inner(const SrnfField& q1, const SrnfField& q2) {
    require_same_grid(q1.grid(), q2.grid(), "inner");
    return kernels::flat_dot(q1.grid(), q1.q(), q2.q()) * q1.grid().cell();
}

double norm(const SrnfField& q) { return std::sqrt(std::max(0.0, inner(q, q))); }

double distance(const SrnfField& q1, const SrnfField& q2) {
    require_same_grid(q1.grid(), q2.grid(), "distance");
    const Eigen::Matrix3Xd d = q1.q() - q2.q();
    return std::sqrt(kernels::flat_dot(q1.grid(), d, d) * q1.grid().cell());
}

} // namespace esa
