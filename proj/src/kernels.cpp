#include "esa/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace esa::kernels {
namespace {

/// Linear interpolation along u inside one (possibly reflected) row.
Eigen::Vector3d sample_row(const SphericalGrid& g, const Eigen::Matrix3Xd& field, int row, double x) {
    const int nu = g.n_u();
    const int nv = g.n_v();
    if (row < 0) {
        row = -1 - row;
        x += 0.5 * nu;
    } else if (row >= nv) {
        row = 2 * nv - 1 - row;
        x += 0.5 * nu;
    }
    const double fl = std::floor(x);
    const double t = x - fl;
    int i0 = static_cast<int>(fl) % nu;
    if (i0 < 0) i0 += nu;
    const int i1 = (i0 + 1) % nu;
    return (1.0 - t) * field.col(g.node(i0, row)) + t * field.col(g.node(i1, row));
}

double row_dot(const SphericalGrid& g, const Eigen::Matrix3Xd& a, const Eigen::Matrix3Xd& b, int row) {
    const int start = row * g.n_u();
    return a.middleCols(start, g.n_u()).cwiseProduct(b.middleCols(start, g.n_u())).sum();
}

} // namespace

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
    static const int initial = omp_get_max_threads();
    omp_set_num_threads(n > 0 ? n : initial);
#else
    (void)n;
#endif
}

Eigen::Vector3d sample_point(const SphericalGrid& g, const Eigen::Matrix3Xd& field, const Eigen::Vector3d& at) {
    const double r = at.norm();
    double theta = std::atan2(at.y(), at.x());
    if (theta < 0.0) theta += 2.0 * std::numbers::pi;
    const double phi = std::acos(std::clamp(at.z() / r, -1.0, 1.0));

    const double x = theta / g.d_theta();
    const double y = phi / g.d_phi() - 0.5;
    const double fy = std::floor(y);
    const double t = y - fy;
    const int j0 = static_cast<int>(fy);
    return (1.0 - t) * sample_row(g, field, j0, x) + t * sample_row(g, field, j0 + 1, x);
}

void sample_field_serial(const SphericalGrid& grid, const Eigen::Matrix3Xd& field, const Eigen::Matrix3Xd& at,
                         Eigen::Matrix3Xd& out) {
    out.resize(3, at.cols());
    for (Eigen::Index k = 0; k < at.cols(); ++k) out.col(k) = sample_point(grid, field, at.col(k));
}

void sample_field(const SphericalGrid& grid, const Eigen::Matrix3Xd& field, const Eigen::Matrix3Xd& at,
                  Eigen::Matrix3Xd& out) {
    out.resize(3, at.cols());
    const Eigen::Index n = at.cols();
#pragma omp parallel for schedule(static) if (n > 2048)
    for (Eigen::Index k = 0; k < n; ++k) out.col(k) = sample_point(grid, field, at.col(k));
}

double flat_dot_serial(const SphericalGrid& grid, const Eigen::Matrix3Xd& a, const Eigen::Matrix3Xd& b) {
    double total = 0.0;
    for (int j = 0; j < grid.n_v(); ++j) total += row_dot(grid, a, b, j);
    return total;
}

double flat_dot(const SphericalGrid& grid, const Eigen::Matrix3Xd& a, const Eigen::Matrix3Xd& b) {
    const int nv = grid.n_v();
    std::vector<double> rows(static_cast<std::size_t>(nv));
#pragma omp parallel for schedule(static) if (grid.size() > 8192)
    for (int j = 0; j < nv; ++j) rows[static_cast<std::size_t>(j)] = row_dot(grid, a, b, j);
    double total = 0.0;
    for (double r : rows) total += r;
    return total;
}

Eigen::MatrixXd pairwise_distances_serial(const Eigen::MatrixXd& samples, double scale) {
    const Eigen::Index n = samples.cols();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            d(i, j) = d(j, i) = scale * (samples.col(i) - samples.col(j)).norm();
        }
    }
    return d;
}

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& samples, double scale) {
    const Eigen::Index n = samples.cols();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = scale * (samples.col(i) - samples.col(j)).norm();
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return d;
}

} // namespace esa::kernels
