#pragma once

#include "esa/grid.hpp"

#include <Eigen/Core>

namespace esa {

/// Per-node 3-vectors, one column per grid node.
using VectorField = Eigen::Matrix3Xd;

/// A parameterised closed surface f : S^2 -> R^3 sampled on a grid.
class Surface {
public:
    /// Throws DimensionError on a column-count mismatch and InputError on
    /// non-finite coordinates.
    Surface(SphericalGrid grid, VectorField points);

    const SphericalGrid& grid() const noexcept { return grid_; }
    const VectorField& points() const noexcept { return points_; }
    Eigen::Vector3d point(int node) const { return points_.col(node); }

    /// Coordinates flattened node by node as (x0, y0, z0, x1, ...).
    Eigen::Map<const Eigen::VectorXd> flat() const {
        return {points_.data(), points_.size()};
    }

private:
    SphericalGrid grid_;
    VectorField points_;
};

/// Builds a surface from a flattened coordinate vector of length 3 * grid.size().
Surface surface_from_flat(const SphericalGrid& grid, const Eigen::VectorXd& flat);

struct Partials {
    VectorField du; ///< derivative along the azimuth theta
    VectorField dv; ///< derivative along the polar angle phi
};

/// Finite-difference partials of any per-node field. Central differences in
/// the interior, periodic in u, second-order one-sided on the first and last
/// rows.
Partials field_partials(const SphericalGrid& grid, const VectorField& field);

Partials partials(const Surface& f);

/// Unnormalised normals f_u x f_v.
struct NormalField {
    SphericalGrid grid;
    VectorField vectors;
};

NormalField normal_field(const Surface& f);

/// Integral of |n| over the parameter domain, i.e. the surface area.
double surface_area(const Surface& f);

/// Area-weighted mean point; falls back to the vertex mean when the area is zero.
Eigen::Vector3d centroid(const Surface& f);

/// Removes translation and, when unit_scale is set, rescales to unit area.
/// Throws NumericalError if unit_scale is requested on a zero-area surface.
Surface normalize(const Surface& f, bool unit_scale);

Surface rotate(const Surface& f, const Eigen::Matrix3d& rotation);
Surface translate(const Surface& f, const Eigen::Vector3d& offset);
Surface scale(const Surface& f, double factor);

/// Flat-measure L2 distance sqrt(sum |f1 - f2|^2 dtheta dphi).
double l2_distance(const Surface& f1, const Surface& f2);

} // namespace esa
