#pragma once

// Data-parallel inner loops. Every kernel has a serial reference (suffix
// _serial) and an OpenMP version with identical results; reductions are
// organised in fixed per-row blocks so the parallel sums are bit-identical
// to the serial ones regardless of thread count.

#include "esa/grid.hpp"

#include <Eigen/Core>

#include <vector>

namespace esa::kernels {

/// Number of worker threads used by the parallel kernels (1 without OpenMP).
int max_threads();
/// Caps the worker count; n <= 0 restores the runtime default.
void set_threads(int n);

/// Bilinear sample of a per-node 3-vector field at arbitrary points of S^2.
///
/// Points are converted to (theta, phi); theta wraps periodically and rows
/// beyond the first/last cell centre are continued across the pole by
/// reflection (row -1 at theta equals row 0 at theta + pi). The field must be
/// continuous across the poles in Cartesian components.
Eigen::Vector3d sample_point(const SphericalGrid& grid, const Eigen::Matrix3Xd& field,
                             const Eigen::Vector3d& at);

void sample_field_serial(const SphericalGrid& grid, const Eigen::Matrix3Xd& field,
                         const Eigen::Matrix3Xd& at, Eigen::Matrix3Xd& out);
void sample_field(const SphericalGrid& grid, const Eigen::Matrix3Xd& field, const Eigen::Matrix3Xd& at,
                  Eigen::Matrix3Xd& out);

/// sum_k a_k . b_k over all columns, accumulated row by row of the grid.
double flat_dot_serial(const SphericalGrid& grid, const Eigen::Matrix3Xd& a, const Eigen::Matrix3Xd& b);
double flat_dot(const SphericalGrid& grid, const Eigen::Matrix3Xd& a, const Eigen::Matrix3Xd& b);

/// Symmetric matrix of Euclidean distances between flattened samples
/// (columns of `samples`), multiplied by `scale`.
Eigen::MatrixXd pairwise_distances_serial(const Eigen::MatrixXd& samples, double scale = 1.0);
Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& samples, double scale = 1.0);

} // namespace esa::kernels
