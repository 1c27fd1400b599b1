#pragma once

#include "esa/registration.hpp"
#include "esa/surface.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace esa {

/// Linear path (1 - tau) f1 + tau f2_star between a surface and its
/// registered counterpart. Throws ArgumentError for tau outside [0, 1].
Surface geodesic(const Surface& f1, const Surface& f2_star, double tau);

/// Registers every surface to `reference`. Independent pairs run in parallel
/// when OpenMP is available; results are identical to the serial loop.
std::vector<RegistrationResult> register_batch(const Surface& reference, std::span<const Surface> surfaces,
                                               const RegistrationOptions& opts);
std::vector<RegistrationResult> register_batch_serial(const Surface& reference,
                                                      std::span<const Surface> surfaces,
                                                      const RegistrationOptions& opts);

struct KarcherOptions {
    RegistrationOptions registration;
    int iterations = 5;
    /// Surface used as the initial mean.
    int initial_index = 0;
    /// When set, the initial surface is drawn at random from this seed instead.
    std::optional<std::uint64_t> seed;
};

struct KarcherResult {
    Surface mean;
    /// Every input registered to `mean` in the final pass.
    std::vector<Surface> registered;
    /// Shape distance of every input to `mean` from the final pass.
    std::vector<double> distances;
    /// Mean squared shape distance to the current mean, per outer iteration.
    std::vector<double> variance_trace;
    int initial_index = 0;
};

/// Iterative mean: starting from one input, alternately register all inputs
/// to the current mean and replace it by the average of the registered
/// surfaces, for a fixed number of iterations, then register all inputs to
/// the result once more.
KarcherResult karcher_mean(std::span<const Surface> surfaces, const KarcherOptions& opts = {});

/// Principal directions of a centred sample matrix (one sample per column).
struct PcaDecomposition {
    Eigen::MatrixXd directions; ///< left singular vectors, orthonormal columns
    Eigen::VectorXd singulars;  ///< non-increasing
    Eigen::MatrixXd right;      ///< right singular vectors
};

PcaDecomposition pca_of_deviations(const Eigen::MatrixXd& deviations);

struct ShapeModel {
    Surface mean;
    Eigen::MatrixXd directions; ///< 3 * n_u * n_v rows
    Eigen::VectorXd singulars;

    int rank() const noexcept { return static_cast<int>(singulars.size()); }
};

/// PCA of the deviations f_i - mean, flattened with the plain Euclidean inner
/// product. Needs at least two surfaces.
ShapeModel shape_pca(std::span<const Surface> registered, const Surface& mean);

/// First `count` principal scores <f - mean, U(:, d)>.
Eigen::VectorXd pc_scores(const Surface& f, const ShapeModel& model, int count);

/// mean + sum_d z_d U(:, d).
Surface reconstruct(const Eigen::VectorXd& scores, const ShapeModel& model);

/// Running share of the singular values (or of their squares).
Eigen::VectorXd cumulative_variance(const Eigen::VectorXd& singulars, bool squared = false);
inline Eigen::VectorXd cumulative_variance(const ShapeModel& model, bool squared = false) {
    return cumulative_variance(model.singulars, squared);
}

/// Surfaces mean + t * sigma_c * U(:, c) for a 1-based component index c.
std::vector<Surface> pc_path(const ShapeModel& model, int component, std::span<const double> t_values);

/// Per-node |f_hat(s) - f(s)|.
Eigen::VectorXd diff_field(const Surface& f_hat, const Surface& f);

/// Single file: one JSON header line, then little-endian doubles for the
/// mean, the directions (column-major) and the singular values.
void save_shape_model(const ShapeModel& model, const std::filesystem::path& path);
ShapeModel load_shape_model(const std::filesystem::path& path);

} // namespace esa
