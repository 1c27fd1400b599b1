#include "esa/harmonics.hpp"

#include "esa/errors.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <string>
#include <numbers>

namespace esa {
namespace {

constexpr double kGradStep = 1e-5;

} // namespace

int harmonic_count(int max_degree) { return (max_degree + 1) * (max_degree + 1) - 1; }

double real_harmonic(int l, int m, const Eigen::Vector3d& p) {
    const double r = p.norm();
    const double phi = std::acos(std::clamp(p.z() / r, -1.0, 1.0));
    const double theta = std::atan2(p.y(), p.x());
    const int am = std::abs(m);
    // std::sph_legendre includes the Condon-Shortley phase and the
    // normalisation of the complex harmonic.
    const double base = std::sph_legendre(static_cast<unsigned>(l), static_cast<unsigned>(am), phi);
    if (m == 0) return base;
    const double s = std::numbers::sqrt2 * base;
    return m > 0 ? s * std::cos(am * theta) : s * std::sin(am * theta);
}

void real_harmonics(int max_degree, const Eigen::Vector3d& p, std::span<double> out) {
    const double r = p.norm();
    const double phi = std::acos(std::clamp(p.z() / r, -1.0, 1.0));
    const double theta = std::atan2(p.y(), p.x());
    std::size_t k = 0;
    for (int l = 1; l <= max_degree; ++l) {
        for (int m = -l; m <= l; ++m) {
            const int am = std::abs(m);
            const double base = std::sph_legendre(static_cast<unsigned>(l), static_cast<unsigned>(am), phi);
            if (m == 0) {
                out[k++] = base;
            } else {
                const double trig = m > 0 ? std::cos(am * theta) : std::sin(am * theta);
                out[k++] = std::numbers::sqrt2 * base * trig;
            }
        }
    }
}

TangentBasis::TangentBasis(int max_degree) : max_degree_(max_degree) {
    if (max_degree < 1) throw ArgumentError("tangent basis needs max_degree >= 1");
    for (int l = 1; l <= max_degree; ++l) {
        for (int m = -l; m <= l; ++m) degree_.push_back(l);
    }
}

Eigen::Matrix3Xd TangentBasis::gradients_at(const Eigen::Vector3d& p) const {
    const int h = static_cast<int>(degree_.size());
    const Eigen::Vector3d s = p.normalized();
    std::vector<double> plus(static_cast<std::size_t>(h));
    std::vector<double> minus(static_cast<std::size_t>(h));
    Eigen::Matrix3Xd grad(3, h);
    for (int axis = 0; axis < 3; ++axis) {
        Eigen::Vector3d step = Eigen::Vector3d::Zero();
        step[axis] = kGradStep;
        real_harmonics(max_degree_, s + step, plus);
        real_harmonics(max_degree_, s - step, minus);
        for (int k = 0; k < h; ++k) {
            grad(axis, k) = (plus[static_cast<std::size_t>(k)] - minus[static_cast<std::size_t>(k)]) /
                            (2.0 * kGradStep);
        }
    }
    // The extension is constant along rays, so the gradient is already
    // tangent; project anyway to drop the O(h^2) radial residue.
    grad -= s * (s.transpose() * grad);
    for (int k = 0; k < h; ++k) {
        const double l = degree_[static_cast<std::size_t>(k)];
        grad.col(k) /= std::sqrt(l * (l + 1.0));
    }
    return grad;
}

Eigen::Matrix3Xd TangentBasis::fields_at(const Eigen::Vector3d& p) const {
    const int h = static_cast<int>(degree_.size());
    const Eigen::Vector3d s = p.normalized();
    const Eigen::Matrix3Xd grad = gradients_at(s);
    Eigen::Matrix3Xd out(3, 2 * h);
    out.leftCols(h) = grad;
    for (int k = 0; k < h; ++k) out.col(h + k) = s.cross(grad.col(k));
    return out;
}

Eigen::Vector3d TangentBasis::combine(std::span<const double> coeffs, const Eigen::Vector3d& p) const {
    if (coeffs.size() != static_cast<std::size_t>(size())) {
        throw DimensionError("tangent basis expects " + std::to_string(size()) + " coefficients, got " +
                             std::to_string(coeffs.size()));
    }
    const Eigen::Matrix3Xd f = fields_at(p);
    return f * Eigen::Map<const Eigen::VectorXd>(coeffs.data(), size());
}

std::vector<Eigen::Matrix3Xd> TangentBasis::sample(const SphericalGrid& grid) const {
    std::vector<Eigen::Matrix3Xd> out(static_cast<std::size_t>(size()), Eigen::Matrix3Xd(3, grid.size()));
    for (int node = 0; node < grid.size(); ++node) {
        const Eigen::Matrix3Xd f = fields_at(grid.nodes().col(node));
        for (int k = 0; k < size(); ++k) out[static_cast<std::size_t>(k)].col(node) = f.col(k);
    }
    return out;
}

} // namespace esa
