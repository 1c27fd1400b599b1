#pragma once

#include <Eigen/Core>

#include <memory>

namespace esa {

/// Cell-centred discretisation of the unit sphere.
///
/// Columns sample the azimuth theta uniformly on [0, 2pi) and wrap
/// periodically. Rows sample the polar angle at cell centres
/// phi_j = (j + 1/2) * pi / n_v, so no node sits on a pole and every
/// quadrature weight sin(phi) dtheta dphi is strictly positive.
///
/// Nodes are stored row-major in v then u: node(i, j) = j * n_u + i.
/// Copies share the same immutable tables.
class SphericalGrid {
public:
    static constexpr int kMinNodes = 8;

    SphericalGrid(int n_u, int n_v);

    int n_u() const noexcept { return n_u_; }
    int n_v() const noexcept { return n_v_; }
    int size() const noexcept { return n_u_ * n_v_; }

    double d_theta() const noexcept { return d_theta_; }
    double d_phi() const noexcept { return d_phi_; }
    /// Flat parameter-domain cell measure dtheta * dphi.
    double cell() const noexcept { return d_theta_ * d_phi_; }

    double theta(int i) const noexcept { return i * d_theta_; }
    double phi(int j) const noexcept { return (j + 0.5) * d_phi_; }
    double sin_phi(int j) const { return tables_->sin_phi[j]; }

    int node(int i, int j) const noexcept { return j * n_u_ + i; }
    int column_of(int node) const noexcept { return node % n_u_; }
    int row_of(int node) const noexcept { return node / n_u_; }

    /// Quadrature weight sin(phi) dtheta dphi of a node.
    double weight(int node) const { return tables_->sin_phi[row_of(node)] * cell(); }
    /// Per-node weights, same order as the nodes.
    const Eigen::VectorXd& weights() const noexcept { return tables_->weights; }
    /// Unit-sphere position of every node (3 x size()).
    const Eigen::Matrix3Xd& nodes() const noexcept { return tables_->nodes; }

    bool operator==(const SphericalGrid& other) const noexcept {
        return n_u_ == other.n_u_ && n_v_ == other.n_v_;
    }

private:
    struct Tables {
        Eigen::VectorXd sin_phi;
        Eigen::VectorXd weights;
        Eigen::Matrix3Xd nodes;
    };

    int n_u_;
    int n_v_;
    double d_theta_;
    double d_phi_;
    std::shared_ptr<const Tables> tables_;
};

/// Builds a grid; throws DimensionError when either count is below 8.
SphericalGrid make_grid(int n_u, int n_v);

/// Throws DimensionError unless the two grids have identical dimensions.
void require_same_grid(const SphericalGrid& a, const SphericalGrid& b, const char* what);

} // namespace esa
