#pragma once

#include "esa/diffeo.hpp"
#include "esa/srnf.hpp"
#include "esa/surface.hpp"

#include <Eigen/Core>

#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace esa {

/// A proper rotation (orthogonal, determinant +1).
class Rotation {
public:
    /// Throws ArgumentError unless ||R^T R - I|| <= 1e-10 and |det R - 1| <= 1e-10.
    explicit Rotation(const Eigen::Matrix3d& m);
    static Rotation identity() { return Rotation(Eigen::Matrix3d::Identity()); }

    const Eigen::Matrix3d& matrix() const noexcept { return m_; }

private:
    Eigen::Matrix3d m_;
};

/// Procrustes solution of argmin_O ||q1 - O q2|| over SO(3): SVD of
/// A = sum_s q1(s) q2(s)^T dtheta dphi, O = U diag(1, 1, det(U V^T)) V^T.
Rotation optimal_rotation(const SrnfField& q1, const SrnfField& q2);

struct ReparamOptions {
    int max_iters = 100;
    double tol_rel = 1e-5;
    int basis_degree = 3;
    /// First trial length of the coefficient step along the unit descent direction.
    double initial_step = 0.05;
    double max_step = 0.5;
    double step_floor = 1e-8;
    /// Coefficient increment of the central-difference gradient.
    double fd_step = 1e-6;
};

/// E(c) = ||q1 - q2 * (base o delta(c))||^2 where delta(c)(s) =
/// normalize(s + sum_k c_k b_k(s)) for the gradient/curl harmonic basis b_k.
///
/// Candidate maps that fold (non-positive Jacobian at any node) evaluate to
/// +infinity, so any descent step that would break orientation is rejected.
class ReparamObjective {
public:
    ReparamObjective(const SrnfField& target, const SrnfField& source, const Diffeo& base, int basis_degree);

    int dimension() const noexcept;
    /// E at c = 0, i.e. for the base map itself.
    double base_value() const noexcept { return base_value_; }
    double evaluate(std::span<const double> coeffs) const;
    /// E along a single basis element: evaluate(t * e_k).
    double evaluate_along(int k, double t) const;
    /// Central-difference gradient at c = 0, one basis element at a time.
    Eigen::VectorXd gradient(double h) const;
    /// base o delta(c); std::nullopt when the map folds.
    std::optional<Diffeo> step(std::span<const double> coeffs) const;
    /// Moves the expansion point to a new base map.
    void rebase(const Diffeo& base);

private:
    Eigen::Matrix3Xd displaced(std::span<const double> coeffs) const;
    double objective_for(const Eigen::Matrix3Xd& delta_image, Eigen::Matrix3Xd* composed) const;

    const SrnfField* target_;
    SphericalGrid grid_;
    Eigen::Matrix3Xd source_smooth_;
    Eigen::Matrix3Xd base_image_;
    std::shared_ptr<const std::vector<Eigen::Matrix3Xd>> basis_;
    double base_value_;
};

struct ReparamResult {
    Diffeo reparam;
    /// E after every accepted step, starting with the initial value.
    std::vector<double> objective_trace;
};

/// Gradient descent over reparameterisations with backtracking (step halving)
/// and incremental accumulation gamma <- gamma o delta. Stops when the
/// relative decrease falls below tol_rel, after max_iters, or when the step
/// drops below step_floor.
ReparamResult optimize_reparam(const SrnfField& q1, const SrnfField& q2, const ReparamOptions& opts = {},
                               const std::optional<Diffeo>& initial = std::nullopt);

struct RegistrationOptions {
    ReparamOptions reparam;
    int rounds = 3;
};

struct RegistrationResult {
    Surface aligned;             ///< O* (f2 o gamma*)
    Rotation rotation;           ///< O*
    Diffeo reparam;              ///< gamma*
    double distance;             ///< ||q1 - srnf(aligned)||
    std::vector<double> objective_trace;
};

/// Shape distance and alignment of f2 to f1 by alternating Procrustes
/// rotation and reparameterisation descent. The trace records the distance
/// ||q1 - srnf(O (f2 o gamma))|| after every accepted update; updates that
/// would increase it are discarded, so the trace never increases and its last
/// entry equals `distance`.
RegistrationResult register_surfaces(const Surface& f1, const Surface& f2, const RegistrationOptions& opts = {});

/// Tangent basis sampled on a grid, cached per (grid, degree).
std::shared_ptr<const std::vector<Eigen::Matrix3Xd>> sampled_basis(const SphericalGrid& grid, int degree);

} // namespace esa
