#include "doctest.h"

#include "support.hpp"

#include "esa/baseline.hpp"
#include "esa/errors.hpp"
#include "esa/kdtree.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <fstream>

using namespace esa;

namespace {

PointCloud random_cloud(int m, std::uint64_t seed) {
    Rng rng(seed);
    PointCloud p(3, m);
    for (int k = 0; k < m; ++k) p.col(k) = Eigen::Vector3d(rng.normal(), 0.7 * rng.normal(), 0.4 * rng.normal());
    return p;
}

// Eqs. written out directly: all unordered pairs, summed point distances.
std::pair<double, double> brute_force(const std::vector<PointCloud>& c, const std::vector<int>& l) {
    double inter = 0, intra = 0;
    int ni = 0, na = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        for (std::size_t j = i + 1; j < c.size(); ++j) {
            double s = 0;
            for (Eigen::Index k = 0; k < c[i].cols(); ++k) s += (c[i].col(k) - c[j].col(k)).norm();
            if (l[i] == l[j]) intra += s, ++na;
            else inter += s, ++ni;
        }
    }
    return {ni ? inter / ni : -1.0, na ? intra / na : -1.0};
}

} // namespace

TEST_CASE("kd-tree nearest neighbour agrees with linear search") {
    const PointCloud p = random_cloud(500, 3);
    const KdTree tree(p);
    Rng rng(4);
    for (int t = 0; t < 200; ++t) {
        const Eigen::Vector3d q(rng.normal(), rng.normal(), rng.normal());
        Eigen::Index best = 0;
        (p.colwise() - q).colwise().squaredNorm().minCoeff(&best);
        const auto hit = tree.nearest(q);
        CHECK(hit.index == best);
        CHECK(hit.squared_distance == doctest::Approx((p.col(best) - q).squaredNorm()));
    }
}

TEST_CASE("rigid fit recovers an exact transform") {
    const PointCloud a = random_cloud(30, 1);
    Rng rng(2);
    const Eigen::Matrix3d r = test::random_rotation(rng);
    const Eigen::Vector3d t(0.3, -1.0, 2.0);
    const PointCloud b = (r * a).colwise() + t;
    Eigen::Matrix3d rr;
    Eigen::Vector3d tt;
    rigid_fit(a, b, rr, tt);
    CHECK((rr - r).norm() < 1e-10);
    CHECK((tt - t).norm() < 1e-10);
    CHECK(rr.determinant() == doctest::Approx(1.0));
}

TEST_CASE("ICP recovers a known rigid motion") {
    const PointCloud fixed = random_cloud(400, 5);
    Rng rng(6);
    for (int t = 0; t < 5; ++t) {
        const Eigen::Matrix3d r = test::random_rotation(rng, 0.3);
        const Eigen::Vector3d tr(rng.normal(), rng.normal(), rng.normal());
        const PointCloud moving = (r * fixed).colwise() + tr;
        const IcpResult res = icp_register(fixed, moving);
        CHECK(res.rms_trace.back() <= 1e-6);
        CHECK((res.rotation - r.transpose()).norm() <= 1e-4);
        CHECK((res.translation + r.transpose() * tr).norm() <= 1e-4);
        const PointCloud recomposed = (res.rotation * moving).colwise() + res.translation;
        CHECK(test::max_abs(recomposed - res.aligned) < 1e-12);
    }
}

TEST_CASE("ICP of a cloud onto itself stops at once") {
    const PointCloud p = random_cloud(100, 7);
    const IcpResult r = icp_register(p, p);
    CHECK(r.rms_trace.size() == 1);
    CHECK(r.rms_trace[0] < 1e-12);
    CHECK((r.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-12);
}

TEST_CASE("ICP traces never increase") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed + 100);
        const PointCloud fixed = random_cloud(200, seed);
        PointCloud moving = (test::random_rotation(rng, 0.8) * fixed).colwise() + Eigen::Vector3d(rng.normal(), 0, 0);
        for (Eigen::Index k = 0; k < moving.size(); ++k) moving.data()[k] += rng.normal(0.0, 0.05);
        const IcpResult r = icp_register(fixed, moving);
        CHECK(std::is_sorted(r.rms_trace.rbegin(), r.rms_trace.rend()));
        CHECK(r.rms_trace.back() <= r.rms_trace.front());
    }
}

TEST_CASE("align-all is consistent with pairwise ICP") {
    std::vector<PointCloud> clouds;
    Rng rng(3);
    const PointCloud base = random_cloud(150, 8);
    for (int i = 0; i < 4; ++i) clouds.push_back(test::random_rotation(rng, 0.2) * base);
    const auto aligned = icp_align_all(clouds, 0);
    REQUIRE(aligned.size() == 4);
    for (const PointCloud& a : aligned) CHECK(test::max_abs(a - aligned[0]) < 1e-6);
}

TEST_CASE("class distances on the hand example") {
    std::vector<PointCloud> c(3, PointCloud::Zero(3, 1));
    c[1](0, 0) = 1;
    c[2](0, 0) = 3;
    const std::vector<int> l{0, 0, 1};
    CHECK(intra_class_distance(c, l) == 1.0);
    CHECK(inter_class_distance(c, l) == 2.5);
    const std::vector<int> swapped{1, 1, 0};
    CHECK(intra_class_distance(c, swapped) == 1.0);
    CHECK(inter_class_distance(c, swapped) == 2.5);
    CHECK(class_distances(c, l).margin() == doctest::Approx(1.5));
}

TEST_CASE("class distances on identical clouds") {
    const PointCloud p = random_cloud(5, 1);
    const std::vector<PointCloud> c{p, p};
    const std::vector<int> l{0, 1};
    CHECK(inter_class_distance(c, l) == 0.0);
    CHECK_THROWS_AS(intra_class_distance(c, l), ArgumentError);
    const std::vector<int> same{1, 1};
    CHECK_THROWS_AS(inter_class_distance(c, same), ArgumentError);
    const std::vector<int> shortl{1};
    CHECK_THROWS_AS(inter_class_distance(c, shortl), DimensionError);
}

TEST_CASE("class distances match brute force and ignore within-class order") {
    Rng rng(9);
    for (int t = 0; t < 30; ++t) {
        const int n = 2 + static_cast<int>(rng.bits() % 4);
        const int m = 1 + static_cast<int>(rng.bits() % 9);
        std::vector<PointCloud> c;
        std::vector<int> l;
        for (int i = 0; i < n; ++i) {
            PointCloud p(3, m);
            for (Eigen::Index k = 0; k < p.size(); ++k) p.data()[k] = static_cast<double>(rng.bits() % 10);
            c.push_back(p);
            l.push_back(static_cast<int>(rng.bits() % 2));
        }
        const auto [inter, intra] = brute_force(c, l);
        if (inter >= 0) CHECK(inter_class_distance(c, l) == inter);
        else CHECK_THROWS_AS(inter_class_distance(c, l), ArgumentError);
        if (intra >= 0) CHECK(intra_class_distance(c, l) == intra);
        else CHECK_THROWS_AS(intra_class_distance(c, l), ArgumentError);
    }
    // permute subjects within a class: (0,a) (0,b) (1,c) -> (0,b) (0,a) (1,c)
    const std::vector<PointCloud> c{random_cloud(4, 1), random_cloud(4, 2), random_cloud(4, 3)};
    const std::vector<PointCloud> p{c[1], c[0], c[2]};
    const std::vector<int> l{0, 0, 1};
    CHECK(inter_class_distance(c, l) == doctest::Approx(inter_class_distance(p, l)).epsilon(1e-15));
    CHECK(intra_class_distance(c, l) == doctest::Approx(intra_class_distance(p, l)).epsilon(1e-15));
}

TEST_CASE("vertex PCA") {
    const PointCloud base = random_cloud(20, 1);
    const std::vector<PointCloud> same(3, base);
    CHECK(vertex_pca(same).singulars.cwiseAbs().maxCoeff() < 1e-12);

    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(random_cloud(20, 2).data(), 60).normalized();
    std::vector<PointCloud> fam;
    for (int i = 0; i < 6; ++i) {
        Eigen::VectorXd f = Eigen::Map<const Eigen::VectorXd>(base.data(), 60) + (i - 2.5) * v;
        fam.push_back(Eigen::Map<const PointCloud>(f.data(), 3, 20));
    }
    const VertexModel m = vertex_pca(fam);
    CHECK(cumulative_variance(m.singulars)[0] == doctest::Approx(1.0));
    const Eigen::MatrixXd g = m.directions.transpose() * m.directions;
    CHECK(test::max_abs(g - Eigen::MatrixXd::Identity(g.rows(), g.cols())) < 1e-8);
    CHECK_THROWS_AS(vertex_pca(std::span<const PointCloud>(fam.data(), 1)), ArgumentError);
}

TEST_CASE("distance matrix validation and CSV round trip") {
    Eigen::MatrixXd d(3, 3);
    d << 0, 1, 2, 1, 0, 1.5, 2, 1.5, 0;
    const DistanceMatrix m(d, {"a", "b", "c"});
    const auto dir = test::scratch_dir("dist");
    save_distance_matrix(m, dir / "d.csv");
    const DistanceMatrix r = load_distance_matrix(dir / "d.csv");
    CHECK(r.names() == m.names());
    CHECK((r.values().array() == d.array()).all());
    CHECK(DistanceMatrix(d).names()[2] == "s2");

    Eigen::MatrixXd asym = d;
    asym(0, 1) = 1.1;
    CHECK_THROWS_AS(DistanceMatrix{asym}, ArgumentError);
    Eigen::MatrixXd diag = d;
    diag(1, 1) = 0.5;
    CHECK_THROWS_AS(DistanceMatrix{diag}, ArgumentError);
    Eigen::MatrixXd neg = d;
    neg(0, 2) = neg(2, 0) = -1;
    CHECK_THROWS_AS(DistanceMatrix{neg}, ArgumentError);
    CHECK_THROWS_AS(DistanceMatrix(Eigen::MatrixXd::Zero(2, 3)), DimensionError);
    {
        std::ofstream f(dir / "bad.csv");
        f << "id,a,b\na,0,1\nb,x,0\n";
    }
    CHECK_THROWS_AS(load_distance_matrix(dir / "bad.csv"), ParseError);
}

TEST_CASE("classical MDS recovers planar points up to rigid motion") {
    Eigen::MatrixXd pts(4, 2);
    pts << 0, 0, 1, 0, 0.3, 2, -1, 0.7;
    Eigen::MatrixXd d(4, 4);
    for (int i = 0; i < 4; ++i) for (int j = 0; j < 4; ++j) d(i, j) = (pts.row(i) - pts.row(j)).norm();
    const MdsResult r = classical_mds(DistanceMatrix(d), 2);
    CHECK_FALSE(r.zero_filled);
    // orthogonal Procrustes of the centred configurations
    const Eigen::MatrixXd a = pts.rowwise() - pts.colwise().mean();
    const Eigen::MatrixXd b = r.coords.rowwise() - r.coords.colwise().mean();
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(b.transpose() * a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::MatrixXd o = svd.matrixU() * svd.matrixV().transpose();
    const double rms = std::sqrt((b * o - a).squaredNorm() / 4.0);
    CHECK(rms <= 1e-8);
    for (int i = 0; i < 4; ++i) for (int j = 0; j < 4; ++j) CHECK(std::abs((r.coords.row(i) - r.coords.row(j)).norm() - d(i, j)) <= 1e-8);

    const MdsResult z = classical_mds(DistanceMatrix(Eigen::MatrixXd::Zero(3, 3)), 2);
    CHECK(z.coords.cwiseAbs().maxCoeff() == 0.0);
    CHECK(z.zero_filled);
    const MdsResult over = classical_mds(DistanceMatrix(d), 3);
    CHECK(over.zero_filled);
    CHECK(over.coords.col(2).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(classical_mds(DistanceMatrix(d), 0), ArgumentError);
}

TEST_CASE("two separated clusters classify perfectly in MDS space") {
    Rng rng(11);
    const int n = 30;
    Eigen::MatrixXd pts(n, 5);
    std::vector<int> labels;
    for (int i = 0; i < n; ++i) {
        labels.push_back(i < n / 2 ? 0 : 1);
        for (int c = 0; c < 5; ++c) pts(i, c) = rng.normal(0, 0.3) + (c == 0 ? 3.0 * labels.back() : 0.0);
    }
    Eigen::MatrixXd d(n, n);
    for (int i = 0; i < n; ++i) for (int j = 0; j < n; ++j) d(i, j) = (pts.row(i) - pts.row(j)).norm();
    const MdsResult r = classical_mds(DistanceMatrix(d), 2);
    Eigen::MatrixXd dm(n, n);
    for (int i = 0; i < n; ++i) for (int j = 0; j < n; ++j) dm(i, j) = (r.coords.row(i) - r.coords.row(j)).norm();
    CHECK(loo_1nn_accuracy(dm, labels) >= 0.95);
}

TEST_CASE("leave-one-out accuracy and tie breaking") {
    Eigen::MatrixXd d(3, 3);
    d << 0, 1, 1, 1, 0, 2, 1, 2, 0;
    // subject 0 ties between 1 and 2 and takes the lower index (correct); subject 2 is wrong
    CHECK(loo_1nn_accuracy(d, std::vector<int>{0, 0, 1}) == doctest::Approx(2.0 / 3.0));
    CHECK(loo_1nn_accuracy(d, std::vector<int>{1, 1, 1}) == 1.0);
}
