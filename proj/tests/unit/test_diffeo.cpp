#include "doctest.h"

#include "support.hpp"

#include "esa/diffeo.hpp"
#include "esa/errors.hpp"

using namespace esa;

TEST_CASE("identity and rotations have unit Jacobian") {
    const SphericalGrid g(32, 24);
    const Diffeo id = identity_diffeo(g);
    CHECK((id.jacobian().array() - 1.0).abs().maxCoeff() < 1e-6);
    Rng rng(3);
    for (int t = 0; t < 5; ++t) {
        const Diffeo r = rotation_diffeo(g, test::random_rotation(rng));
        CHECK((r.jacobian().array() - 1.0).abs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("composition with the identity returns the map") {
    const SphericalGrid g(48, 48);
    const Diffeo gam = random_diffeo(g, 7, 0.2, 3);
    const Diffeo c = compose(identity_diffeo(g), gam);
    // the identity is interpolated at gamma(s); bilinear error is O(h^2)
    CHECK(test::max_abs(c.image() - gam.image()) < 2e-3);
    const Diffeo c2 = compose(gam, identity_diffeo(g));
    CHECK(test::max_abs(c2.image() - gam.image()) < 1e-14);
}

TEST_CASE("Jacobian of a known area-changing map") {
    // Polar-angle remap phi -> phi + a sin(phi) cos(phi)... area ratio by hand:
    // J = sin(phi') dphi'/dphi / sin(phi).
    const SphericalGrid g(64, 64);
    const double a = 0.2;
    Eigen::Matrix3Xd img(3, g.size());
    Eigen::VectorXd expect(g.size());
    for (int k = 0; k < g.size(); ++k) {
        const double th = g.theta(g.column_of(k)), ph = g.phi(g.row_of(k));
        const double p2 = ph + a * std::sin(2 * ph) / 2;
        img.col(k) = Eigen::Vector3d(std::sin(p2) * std::cos(th), std::sin(p2) * std::sin(th), std::cos(p2));
        expect[k] = std::sin(p2) * (1 + a * std::cos(2 * ph)) / std::sin(ph);
    }
    const Eigen::VectorXd j = jacobian_det(g, img);
    CHECK((j - expect).cwiseAbs().maxCoeff() < 5e-3);
}

TEST_CASE("random_diffeo contract") {
    const SphericalGrid g(64, 64);
    const Diffeo zero = random_diffeo(g, 1, 0.0, 3);
    CHECK(test::max_abs(zero.image() - g.nodes()) < 1e-15);

    const Diffeo a = random_diffeo(g, 42, 0.2, 3);
    const Diffeo b = random_diffeo(g, 42, 0.2, 3);
    CHECK((a.image().array() == b.image().array()).all());
    CHECK(a.jacobian().minCoeff() > 0.0);
    CHECK(max_displacement(a) > 0.05);
    CHECK((a.image().colwise().norm().array() - 1.0).abs().maxCoeff() <= 1e-10);

    const Diffeo c = random_diffeo(g, 43, 0.2, 3);
    CHECK(test::max_abs(a.image() - c.image()) > 1e-3);
}

TEST_CASE("orientation-reversing maps are rejected") {
    const SphericalGrid g(16, 16);
    Eigen::Matrix3Xd mirrored = g.nodes();
    mirrored.row(0) *= -1.0;
    CHECK_THROWS_AS(Diffeo(g, mirrored), OrientationError);
    CHECK(jacobian_det(g, mirrored).maxCoeff() < 0.0);
}

TEST_CASE("pullback by the identity and by a rotation") {
    const SphericalGrid g(32, 32);
    const Surface f = test::wobbly_surface(g);
    CHECK(test::max_abs(pullback(f, identity_diffeo(g)).points() - f.points()) < 1e-14);
    // f o gamma evaluated at nodes is f(gamma(s)); for the sphere itself that is gamma(s)
    const Diffeo gam = random_diffeo(g, 2, 0.2, 3);
    const Surface s = test::analytic_sphere(g);
    CHECK(test::max_abs(pullback(s, gam).points() - gam.image()) < 1e-2);
}
