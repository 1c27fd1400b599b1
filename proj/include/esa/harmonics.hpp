#pragma once

#include "esa/grid.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace esa {

/// Number of real spherical harmonics with 1 <= l <= max_degree.
int harmonic_count(int max_degree);

/// Orthonormal real spherical harmonic Y_lm at a point of S^2 (need not be
/// unit length; it is projected radially). m < 0 selects the sine branch.
double real_harmonic(int l, int m, const Eigen::Vector3d& p);

/// Writes every Y_lm with 1 <= l <= max_degree, ordered by l then m = -l..l.
void real_harmonics(int max_degree, const Eigen::Vector3d& p, std::span<double> out);

/// Tangent vector fields on S^2 spanned by gradients and curls of the real
/// spherical harmonics up to a given degree.
///
/// Field k < harmonic_count is grad Y / sqrt(l(l+1)); field harmonic_count + k
/// is p x grad Y / sqrt(l(l+1)). Both families have unit L2 norm on S^2.
/// Gradients are taken by central differences of the degree-0 homogeneous
/// extension Y(x / |x|), which is smooth through the poles.
class TangentBasis {
public:
    explicit TangentBasis(int max_degree);

    int max_degree() const noexcept { return max_degree_; }
    int size() const noexcept { return 2 * static_cast<int>(degree_.size()); }

    /// All basis vectors at p, one column per field (3 x size()).
    Eigen::Matrix3Xd fields_at(const Eigen::Vector3d& p) const;

    /// sum_k coeffs[k] * field_k(p).
    Eigen::Vector3d combine(std::span<const double> coeffs, const Eigen::Vector3d& p) const;

    /// Basis sampled on every grid node: entry k is a 3 x grid.size() field.
    std::vector<Eigen::Matrix3Xd> sample(const SphericalGrid& grid) const;

private:
    /// Spherical gradients of every harmonic at p (3 x harmonic_count).
    Eigen::Matrix3Xd gradients_at(const Eigen::Vector3d& p) const;

    int max_degree_;
    std::vector<int> degree_;
};

} // namespace esa
