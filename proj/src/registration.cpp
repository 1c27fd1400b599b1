#include "esa/registration.hpp"

#include "esa/errors.hpp"
#include "esa/harmonics.hpp"
#include "esa/kernels.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <tuple>

namespace esa {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// ||q1 - srnf(O (f2 o gamma))|| together with the aligned surface.
struct Candidate {
    Surface aligned;
    double distance;
};

Candidate evaluate_alignment(const SrnfField& q1, const Surface& f2, const Eigen::Matrix3d& rotation,
                             const Diffeo& gamma) {
    Surface aligned = rotate(pullback(f2, gamma), rotation);
    const double d = distance(q1, srnf(aligned));
    return {std::move(aligned), d};
}

} // namespace

Rotation::Rotation(const Eigen::Matrix3d& m) : m_(m) {
    const double orth = (m.transpose() * m - Eigen::Matrix3d::Identity()).norm();
    const double det = m.determinant();
    if (!(orth <= 1e-10) || !(std::abs(det - 1.0) <= 1e-10)) {
        throw ArgumentError("matrix is not a proper rotation (orthogonality error " + std::to_string(orth) +
                            ", det " + std::to_string(det) + ")");
    }
}

Rotation optimal_rotation(const SrnfField& q1, const SrnfField& q2) {
    require_same_grid(q1.grid(), q2.grid(), "optimal_rotation");
    const Eigen::Matrix3d a = q1.q() * q2.q().transpose() * q1.grid().cell();
    const Eigen::JacobiSVD<Eigen::Matrix3d> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Matrix3d& u = svd.matrixU();
    const Eigen::Matrix3d& v = svd.matrixV();
    Eigen::Vector3d d(1.0, 1.0, (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0);
    Eigen::Matrix3d o = u * d.asDiagonal() * v.transpose();
    // Re-orthonormalise to absorb SVD rounding before validation.
    const Eigen::JacobiSVD<Eigen::Matrix3d> polish(o, Eigen::ComputeFullU | Eigen::ComputeFullV);
    o = polish.matrixU() * polish.matrixV().transpose();
    return Rotation(o);
}

std::shared_ptr<const std::vector<Eigen::Matrix3Xd>> sampled_basis(const SphericalGrid& grid, int degree) {
    static std::mutex mutex;
    static std::map<std::tuple<int, int, int>, std::shared_ptr<const std::vector<Eigen::Matrix3Xd>>> cache;
    const auto key = std::make_tuple(grid.n_u(), grid.n_v(), degree);
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    auto sampled = std::make_shared<const std::vector<Eigen::Matrix3Xd>>(TangentBasis(degree).sample(grid));
    std::lock_guard lock(mutex);
    return cache.try_emplace(key, std::move(sampled)).first->second;
}

ReparamObjective::ReparamObjective(const SrnfField& target, const SrnfField& source, const Diffeo& base,
                                   int basis_degree)
    : target_(&target), grid_(target.grid()), base_image_(base.image()),
      basis_(sampled_basis(target.grid(), basis_degree)) {
    require_same_grid(target.grid(), source.grid(), "optimize_reparam");
    require_same_grid(target.grid(), base.grid(), "optimize_reparam");
    source_smooth_.resize(3, grid_.size());
    for (int k = 0; k < grid_.size(); ++k) {
        source_smooth_.col(k) = source.q().col(k) / std::sqrt(grid_.sin_phi(grid_.row_of(k)));
    }
    base_value_ = objective_for(grid_.nodes(), nullptr);
}

int ReparamObjective::dimension() const noexcept { return static_cast<int>(basis_->size()); }

Eigen::Matrix3Xd ReparamObjective::displaced(std::span<const double> coeffs) const {
    if (coeffs.size() != basis_->size()) {
        throw DimensionError("reparameterisation step expects " + std::to_string(basis_->size()) +
                             " coefficients");
    }
    Eigen::Matrix3Xd image = grid_.nodes();
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        if (coeffs[k] != 0.0) image += coeffs[k] * (*basis_)[k];
    }
    image.colwise().normalize();
    return image;
}

double ReparamObjective::objective_for(const Eigen::Matrix3Xd& delta_image, Eigen::Matrix3Xd* composed) const {
    Eigen::Matrix3Xd image;
    kernels::sample_field(grid_, base_image_, delta_image, image);
    image.colwise().normalize();
    const Eigen::VectorXd jac = jacobian_det(grid_, image);
    if (!(jac.minCoeff() > 0.0)) return kInf;

    Eigen::Matrix3Xd moved;
    kernels::sample_field(grid_, source_smooth_, image, moved);
    for (int k = 0; k < grid_.size(); ++k) {
        moved.col(k) *= std::sqrt(jac[k] * grid_.sin_phi(grid_.row_of(k)));
    }
    moved = target_->q() - moved;
    if (composed) *composed = std::move(image);
    return kernels::flat_dot(grid_, moved, moved) * grid_.cell();
}

double ReparamObjective::evaluate(std::span<const double> coeffs) const {
    return objective_for(displaced(coeffs), nullptr);
}

double ReparamObjective::evaluate_along(int k, double t) const {
    Eigen::Matrix3Xd image = grid_.nodes() + t * (*basis_)[static_cast<std::size_t>(k)];
    image.colwise().normalize();
    return objective_for(image, nullptr);
}

Eigen::VectorXd ReparamObjective::gradient(double h) const {
    Eigen::VectorXd g(dimension());
    for (int k = 0; k < dimension(); ++k) {
        g[k] = (evaluate_along(k, h) - evaluate_along(k, -h)) / (2.0 * h);
    }
    return g;
}

void ReparamObjective::rebase(const Diffeo& base) {
    require_same_grid(grid_, base.grid(), "optimize_reparam");
    base_image_ = base.image();
    base_value_ = objective_for(grid_.nodes(), nullptr);
}

std::optional<Diffeo> ReparamObjective::step(std::span<const double> coeffs) const {
    Eigen::Matrix3Xd composed;
    if (objective_for(displaced(coeffs), &composed) == kInf) return std::nullopt;
    try {
        return Diffeo(grid_, std::move(composed));
    } catch (const OrientationError&) {
        return std::nullopt;
    }
}

ReparamResult optimize_reparam(const SrnfField& q1, const SrnfField& q2, const ReparamOptions& opts,
                               const std::optional<Diffeo>& initial) {
    Diffeo gamma = initial ? *initial : identity_diffeo(q1.grid());
    ReparamObjective objective(q1, q2, gamma, opts.basis_degree);
    double energy = objective.base_value();
    std::vector<double> trace{energy};

    const double scale = inner(q1, q1) + inner(q2, q2);
    const double negligible = 1e-24 * std::max(scale, 1.0);
    double step = opts.initial_step;

    for (int it = 0; it < opts.max_iters && energy > negligible; ++it) {
        const Eigen::VectorXd grad = objective.gradient(opts.fd_step);
        const double gnorm = grad.norm();
        if (!(gnorm > 0.0) || !std::isfinite(gnorm)) break;
        const Eigen::VectorXd direction = -grad / gnorm;

        bool accepted = false;
        double trial_energy = energy;
        Eigen::VectorXd coeffs;
        while (step >= opts.step_floor) {
            coeffs = step * direction;
            trial_energy = objective.evaluate({coeffs.data(), static_cast<std::size_t>(coeffs.size())});
            if (trial_energy < energy) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        std::optional<Diffeo> next = objective.step({coeffs.data(), static_cast<std::size_t>(coeffs.size())});
        if (!next) break;
        gamma = std::move(*next);
        const double relative = (energy - trial_energy) / energy;
        energy = trial_energy;
        trace.push_back(energy);
        step = std::min(2.0 * step, opts.max_step);
        if (relative < opts.tol_rel) break;
        objective.rebase(gamma);
    }
    return {std::move(gamma), std::move(trace)};
}

RegistrationResult register_surfaces(const Surface& f1, const Surface& f2, const RegistrationOptions& opts) {
    require_same_grid(f1.grid(), f2.grid(), "register");
    const SrnfField q1 = srnf(f1);
    const SrnfField q2 = srnf(f2);

    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Diffeo gamma = identity_diffeo(f1.grid());
    Candidate best = evaluate_alignment(q1, f2, rotation, gamma);
    std::vector<double> trace{best.distance};

    for (int round = 0; round < opts.rounds; ++round) {
        bool changed = false;

        const Rotation r = optimal_rotation(q1, srnf_action(q2, gamma));
        if (Candidate c = evaluate_alignment(q1, f2, r.matrix(), gamma); c.distance <= best.distance) {
            changed = changed || !r.matrix().isApprox(rotation, 1e-14);
            rotation = r.matrix();
            best = std::move(c);
            trace.push_back(best.distance);
        }

        ReparamResult reparam = optimize_reparam(q1, rotate(q2, rotation), opts.reparam, gamma);
        if (reparam.objective_trace.size() > 1) {
            Candidate c = evaluate_alignment(q1, f2, rotation, reparam.reparam);
            if (c.distance <= best.distance) {
                gamma = std::move(reparam.reparam);
                best = std::move(c);
                trace.push_back(best.distance);
                changed = true;
            }
        }
        if (!changed) break;
    }
    return {std::move(best.aligned), Rotation(rotation), std::move(gamma), best.distance, std::move(trace)};
}

} // namespace esa
