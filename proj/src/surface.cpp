#include "esa/surface.hpp"

#include "esa/errors.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <string>

namespace esa {

Surface::Surface(SphericalGrid grid, VectorField points)
    : grid_(std::move(grid)), points_(std::move(points)) {
    if (points_.cols() != grid_.size()) {
        throw DimensionError("surface has " + std::to_string(points_.cols()) + " points, grid " +
                             std::to_string(grid_.n_u()) + "x" + std::to_string(grid_.n_v()) +
                             " needs " + std::to_string(grid_.size()));
    }
    if (!points_.allFinite()) throw InputError("surface contains non-finite coordinates");
}

Surface surface_from_flat(const SphericalGrid& grid, const Eigen::VectorXd& flat) {
    if (flat.size() != 3 * grid.size()) {
        throw DimensionError("flattened surface has " + std::to_string(flat.size()) +
                             " entries, expected " + std::to_string(3 * grid.size()));
    }
    return Surface(grid, Eigen::Map<const VectorField>(flat.data(), 3, grid.size()));
}

Partials field_partials(const SphericalGrid& grid, const VectorField& field) {
    const int nu = grid.n_u();
    const int nv = grid.n_v();
    const double hu = 1.0 / (2.0 * grid.d_theta());
    const double hv = 1.0 / (2.0 * grid.d_phi());

    Partials p{VectorField(3, grid.size()), VectorField(3, grid.size())};
    for (int j = 0; j < nv; ++j) {
        for (int i = 0; i < nu; ++i) {
            const int k = grid.node(i, j);
            const int right = grid.node((i + 1) % nu, j);
            const int left = grid.node((i + nu - 1) % nu, j);
            p.du.col(k) = (field.col(right) - field.col(left)) * hu;

            if (j == 0) {
                p.dv.col(k) = (-3.0 * field.col(k) + 4.0 * field.col(grid.node(i, 1)) -
                               field.col(grid.node(i, 2))) * hv;
            } else if (j == nv - 1) {
                p.dv.col(k) = (3.0 * field.col(k) - 4.0 * field.col(grid.node(i, j - 1)) +
                               field.col(grid.node(i, j - 2))) * hv;
            } else {
                p.dv.col(k) = (field.col(grid.node(i, j + 1)) - field.col(grid.node(i, j - 1))) * hv;
            }
        }
    }
    return p;
}

Partials partials(const Surface& f) { return field_partials(f.grid(), f.points()); }

NormalField normal_field(const Surface& f) {
    const Partials p = partials(f);
    NormalField n{f.grid(), VectorField(3, f.grid().size())};
    for (int k = 0; k < f.grid().size(); ++k) {
        n.vectors.col(k) = p.du.col(k).cross(p.dv.col(k));
    }
    return n;
}

double surface_area(const Surface& f) {
    return normal_field(f).vectors.colwise().norm().sum() * f.grid().cell();
}

Eigen::Vector3d centroid(const Surface& f) {
    const Eigen::RowVectorXd density = normal_field(f).vectors.colwise().norm();
    const double total = density.sum();
    if (!(total > 0.0)) return f.points().rowwise().mean();
    return (f.points() * density.transpose()) / total;
}

Surface normalize(const Surface& f, bool unit_scale) {
    VectorField centred = f.points().colwise() - centroid(f);
    if (unit_scale) {
        const double area = surface_area(f);
        if (!(area > 0.0)) throw NumericalError("cannot rescale a zero-area surface to unit area");
        centred /= std::sqrt(area);
    }
    return Surface(f.grid(), std::move(centred));
}

Surface rotate(const Surface& f, const Eigen::Matrix3d& rotation) {
    return Surface(f.grid(), rotation * f.points());
}

Surface translate(const Surface& f, const Eigen::Vector3d& offset) {
    return Surface(f.grid(), f.points().colwise() + offset);
}

Surface scale(const Surface& f, double factor) { return Surface(f.grid(), f.points() * factor); }

double l2_distance(const Surface& f1, const Surface& f2) {
    require_same_grid(f1.grid(), f2.grid(), "l2_distance");
    return std::sqrt((f1.points() - f2.points()).squaredNorm() * f1.grid().cell());
}

} // namespace esa
