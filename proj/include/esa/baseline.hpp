#pragma once

// Vertex-wise comparison pipeline: rigid ICP alignment of point clouds,
// point-cloud PCA, class distance summaries and classical MDS.

#include "esa/statistics.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace esa {

/// m points in R^3, one per column, in a fixed order shared across subjects.
using PointCloud = Eigen::Matrix3Xd;

struct IcpOptions {
    int max_iters = 50;
    double tol = 1e-8;
    /// Subtract each cloud's vertex mean before iterating.
    bool precenter = true;
};

struct IcpResult {
    PointCloud aligned;
    /// aligned = rotation * moving + translation (columnwise).
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    /// Nearest-neighbour RMS at every iteration; the last entry belongs to
    /// the returned cloud.
    std::vector<double> rms_trace;
};

/// Rigid transform (R, t) minimising sum |R a_k + t - b_k|^2, with the
/// determinant correction that keeps R proper.
void rigid_fit(const PointCloud& a, const PointCloud& b, Eigen::Matrix3d& rotation, Eigen::Vector3d& translation);

/// Point-to-point ICP of `moving` onto `fixed`.
IcpResult icp_register(const PointCloud& fixed, const PointCloud& moving, const IcpOptions& opts = {});

/// Aligns every cloud to clouds[reference] with ICP.
std::vector<PointCloud> icp_align_all(std::span<const PointCloud> clouds, int reference = 0,
                                      const IcpOptions& opts = {});

/// Average total point-wise distance over unordered pairs with differing
/// labels. Throws ArgumentError when there is no such pair.
double inter_class_distance(std::span<const PointCloud> clouds, std::span<const int> labels);
/// Same over pairs with equal labels.
double intra_class_distance(std::span<const PointCloud> clouds, std::span<const int> labels);

struct ClassDistances {
    double inter = 0.0;
    double intra = 0.0;
    double margin() const { return (inter - intra) / intra; }
};
ClassDistances class_distances(std::span<const PointCloud> clouds, std::span<const int> labels);

struct VertexModel {
    PointCloud mean;
    Eigen::MatrixXd directions; ///< 3m rows
    Eigen::VectorXd singulars;
};

/// PCA of already aligned clouds, with the same flattening and SVD as
/// shape_pca. Needs at least two clouds.
VertexModel vertex_pca(std::span<const PointCloud> aligned);

/// Symmetric, nonnegative, zero-diagonal matrix with optional row names.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    /// Throws ArgumentError unless the invariants hold within 1e-10.
    explicit DistanceMatrix(Eigen::MatrixXd d, std::vector<std::string> names = {});

    const Eigen::MatrixXd& values() const noexcept { return d_; }
    const std::vector<std::string>& names() const noexcept { return names_; }
    int size() const noexcept { return static_cast<int>(d_.rows()); }
    double operator()(int i, int j) const { return d_(i, j); }

private:
    Eigen::MatrixXd d_;
    std::vector<std::string> names_;
};

void save_distance_matrix(const DistanceMatrix& d, const std::filesystem::path& path);
DistanceMatrix load_distance_matrix(const std::filesystem::path& path);

struct MdsResult {
    Eigen::MatrixXd coords;      ///< n x k
    Eigen::VectorXd eigenvalues; ///< leading k, clamped at zero
    /// Set when fewer than k eigenvalues were positive; the rest of the
    /// columns are zero.
    bool zero_filled = false;
};

/// Torgerson scaling: B = -1/2 J D^2 J, top-k eigenpairs.
MdsResult classical_mds(const DistanceMatrix& d, int k);

void save_coordinates_csv(const Eigen::MatrixXd& coords, std::span<const std::string> names,
                          std::span<const int> labels, const std::filesystem::path& path);

/// Leave-one-out nearest-neighbour label accuracy from a distance matrix;
/// ties go to the lower index.
double loo_1nn_accuracy(const Eigen::MatrixXd& d, std::span<const int> labels);

} // namespace esa
