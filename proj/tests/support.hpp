#pragma once

// Shared fixtures for the test programs: analytic surfaces written out
// independently of the generators under test, rotations and scratch paths.

#include "esa/grid.hpp"
#include "esa/rng.hpp"
#include "esa/surface.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <filesystem>
#include <string>

namespace esa::test {

/// Sphere of radius r centred at c, written from the spherical-coordinate formula.
inline Surface analytic_sphere(const SphericalGrid& g, double r = 1.0, Eigen::Vector3d c = Eigen::Vector3d::Zero()) {
    Eigen::Matrix3Xd p(3, g.size());
    for (int j = 0; j < g.n_v(); ++j) {
        for (int i = 0; i < g.n_u(); ++i) {
            const double th = g.theta(i), ph = g.phi(j);
            p.col(g.node(i, j)) = c + r * Eigen::Vector3d(std::sin(ph) * std::cos(th), std::sin(ph) * std::sin(th), std::cos(ph));
        }
    }
    return Surface(g, p);
}

inline Surface analytic_ellipsoid(const SphericalGrid& g, double a, double b, double c) {
    Eigen::Matrix3Xd p(3, g.size());
    for (int j = 0; j < g.n_v(); ++j) {
        for (int i = 0; i < g.n_u(); ++i) {
            const double th = g.theta(i), ph = g.phi(j);
            p.col(g.node(i, j)) = Eigen::Vector3d(a * std::sin(ph) * std::cos(th), b * std::sin(ph) * std::sin(th), c * std::cos(ph));
        }
    }
    return Surface(g, p);
}

/// Smooth star-shaped test surface r(s) = 1 + sum of low-order trigonometric bumps.
inline Surface wobbly_surface(const SphericalGrid& g, double a1 = 0.15, double a2 = 0.1) {
    Eigen::Matrix3Xd p(3, g.size());
    for (int j = 0; j < g.n_v(); ++j) {
        for (int i = 0; i < g.n_u(); ++i) {
            const double th = g.theta(i), ph = g.phi(j);
            const Eigen::Vector3d s(std::sin(ph) * std::cos(th), std::sin(ph) * std::sin(th), std::cos(ph));
            const double r = 1.0 + a1 * s.x() * s.z() + a2 * (s.y() * s.y() - 0.3) + 0.05 * s.x();
            p.col(g.node(i, j)) = r * s;
        }
    }
    return Surface(g, p);
}

inline Eigen::Matrix3d random_rotation(Rng& rng, double max_angle = 3.14159) {
    Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
    axis.normalize();
    return Eigen::AngleAxisd(rng.uniform(-max_angle, max_angle), axis).toRotationMatrix();
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("esa_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

} // namespace esa::test
