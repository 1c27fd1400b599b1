#pragma once

#include "esa/diffeo.hpp"
#include "esa/grid.hpp"
#include "esa/surface.hpp"

#include <Eigen/Core>

namespace esa {

/// Square-root normal field q(s) = n(s) / |n(s)|^(1/2), n = f_u x f_v.
class SrnfField {
public:
    SrnfField(SphericalGrid grid, Eigen::Matrix3Xd q);

    const SphericalGrid& grid() const noexcept { return grid_; }
    const Eigen::Matrix3Xd& q() const noexcept { return q_; }

private:
    SphericalGrid grid_;
    Eigen::Matrix3Xd q_;
};

/// Floor applied to |n| before the square root.
inline constexpr double kNormalFloor = 1e-12;

SrnfField srnf(const Surface& f);

/// (q * gamma)(s) = sqrt(J(s)) q(gamma(s)), the SRNF of f o gamma.
///
/// With the flat dtheta dphi measure the factor J is the Jacobian of gamma in
/// (theta, phi) coordinates, i.e. the area ratio times sin(phi(s)) /
/// sin(phi(gamma(s))). It is evaluated as sqrt(area_ratio * sin(phi(s))) times
/// the interpolated field q / sqrt(sin(phi)), which is smooth through the
/// poles.
SrnfField srnf_action(const SrnfField& q, const Diffeo& gamma);

/// The same action with the area-ratio Jacobian supplied explicitly; used by
/// the optimiser, which evaluates many candidate maps without validating them.
SrnfField srnf_action(const SrnfField& q, const Eigen::Matrix3Xd& image, const Eigen::VectorXd& area_ratio);

SrnfField rotate(const SrnfField& q, const Eigen::Matrix3d& rotation);

/// sum_s q1(s) . q2(s) dtheta dphi
double inner(const SrnfField& q1, const SrnfField& q2);
double norm(const SrnfField& q);
/// ||q1 - q2||
double distance(const SrnfField& q1, const SrnfField& q2);

} // namespace esa
