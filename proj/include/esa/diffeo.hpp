#pragma once

#include "esa/grid.hpp"
#include "esa/surface.hpp"

#include <Eigen/Core>

#include <cstdint>

namespace esa {

/// A grid-sampled orientation-preserving map gamma : S^2 -> S^2.
///
/// Stores gamma(s) for every node s. Construction renormalises the images to
/// unit length and verifies that the area-ratio Jacobian is positive at every
/// node (OrientationError otherwise).
class Diffeo {
public:
    Diffeo(SphericalGrid grid, Eigen::Matrix3Xd image);

    const SphericalGrid& grid() const noexcept { return grid_; }
    const Eigen::Matrix3Xd& image() const noexcept { return image_; }
    /// Area-ratio Jacobian determinant at every node (identity gives 1).
    const Eigen::VectorXd& jacobian() const noexcept { return jacobian_; }

private:
    SphericalGrid grid_;
    Eigen::Matrix3Xd image_;
    Eigen::VectorXd jacobian_;
};

Diffeo identity_diffeo(const SphericalGrid& grid);

/// gamma_R(s) = R s.
Diffeo rotation_diffeo(const SphericalGrid& grid, const Eigen::Matrix3d& rotation);

/// compose(g1, g2)(s) = g1(g2(s)); g1 is interpolated at the images of g2.
Diffeo compose(const Diffeo& g1, const Diffeo& g2);

/// Area-ratio Jacobian determinant of an arbitrary unit-vector field on the
/// grid: the finite-difference cross-product density of the map divided by
/// the same finite-difference density of the identity. Non-positive values
/// signal a fold. Does not throw.
Eigen::VectorXd jacobian_det(const SphericalGrid& grid, const Eigen::Matrix3Xd& image);
inline const Eigen::VectorXd& jacobian_det(const Diffeo& g) { return g.jacobian(); }

/// f o gamma, sampled by bilinear interpolation of f at gamma(s).
Surface pullback(const Surface& f, const Diffeo& gamma);

/// Seeded random reparameterisation: a composition of five small flows, each
/// moving s to normalize(s + v(s)) with v a random combination of the
/// gradient/curl harmonic fields up to max_degree. `magnitude` is the RMS
/// Euclidean norm of each flow's coefficient vector. If a fold appears the
/// draw is repeated with half the magnitude, up to 10 times, before
/// OrientationError is thrown. Maps are evaluated exactly at each node; no
/// interpolation is involved.
Diffeo random_diffeo(const SphericalGrid& grid, std::uint64_t seed, double magnitude, int max_degree);

/// Largest geodesic-chord displacement max_s |gamma(s) - s|.
double max_displacement(const Diffeo& g);

} // namespace esa
