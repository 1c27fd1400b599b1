#include "esa/baseline.hpp"

#include "esa/errors.hpp"
#include "esa/kdtree.hpp"
#include "esa/parallel.hpp"

#include "csv.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <fstream>
#include <limits>

namespace esa {
namespace {

void require_cloud(const PointCloud& c, const char* what) {
    if (c.cols() == 0) throw ArgumentError(std::string(what) + " point cloud is empty");
    if (!c.allFinite()) throw InputError(std::string(what) + " point cloud has non-finite coordinates");
}

void require_cohort(std::span<const PointCloud> clouds, std::span<const int> labels) {
    if (clouds.size() != labels.size()) throw DimensionError("one label per point cloud is required");
    for (const PointCloud& c : clouds) {
        if (c.cols() != clouds.front().cols()) throw DimensionError("point clouds differ in size");
    }
}

double pair_total(const PointCloud& a, const PointCloud& b) { return (a - b).colwise().norm().sum(); }

double average_over_pairs(std::span<const PointCloud> clouds, std::span<const int> labels, bool same,
                          const char* what) {
    require_cohort(clouds, labels);
    double sum = 0.0;
    long pairs = 0;
    for (std::size_t i = 0; i < clouds.size(); ++i) {
        for (std::size_t j = i + 1; j < clouds.size(); ++j) {
            if ((labels[i] == labels[j]) != same) continue;
            sum += pair_total(clouds[i], clouds[j]);
            ++pairs;
        }
    }
    if (pairs == 0) throw ArgumentError(std::string("no ") + what + " pair in the cohort");
    return sum / static_cast<double>(pairs);
}

} // namespace

void rigid_fit(const PointCloud& a, const PointCloud& b, Eigen::Matrix3d& rotation, Eigen::Vector3d& translation) {
    if (a.cols() != b.cols() || a.cols() == 0) throw DimensionError("rigid_fit needs matched nonempty clouds");
    const Eigen::Vector3d ca = a.rowwise().mean();
    const Eigen::Vector3d cb = b.rowwise().mean();
    const Eigen::Matrix3d h = (a.colwise() - ca) * (b.colwise() - cb).transpose();
    const Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d fix = Eigen::Matrix3d::Identity();
    fix(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
    rotation = svd.matrixV() * fix * svd.matrixU().transpose();
    translation = cb - rotation * ca;
}

IcpResult icp_register(const PointCloud& fixed, const PointCloud& moving, const IcpOptions& opts) {
    require_cloud(fixed, "fixed");
    require_cloud(moving, "moving");

    IcpResult out;
    if (opts.precenter) out.translation = fixed.rowwise().mean() - moving.rowwise().mean();
    const KdTree tree(fixed);
    out.aligned = moving.colwise() + out.translation;

    PointCloud matched(3, moving.cols());
    double previous = std::numeric_limits<double>::infinity();
    for (int it = 0;; ++it) {
        double sum = 0.0;
        for (Eigen::Index k = 0; k < out.aligned.cols(); ++k) {
            const KdTree::Hit hit = tree.nearest(out.aligned.col(k));
            matched.col(k) = fixed.col(hit.index);
            sum += hit.squared_distance;
        }
        const double rms = std::sqrt(sum / static_cast<double>(out.aligned.cols()));
        if (rms > previous) break; // rounding-level rise at convergence
        out.rms_trace.push_back(rms);
        if (rms == 0.0 || previous - rms < opts.tol || it >= opts.max_iters) break;
        previous = rms;

        Eigen::Matrix3d r;
        Eigen::Vector3d t;
        rigid_fit(out.aligned, matched, r, t);
        out.aligned = (r * out.aligned).colwise() + t;
        out.rotation = r * out.rotation;
        out.translation = r * out.translation + t;
    }
    // The aligned cloud always corresponds to the last trace entry.
    out.aligned = (out.rotation * moving).colwise() + out.translation;
    return out;
}

std::vector<PointCloud> icp_align_all(std::span<const PointCloud> clouds, int reference, const IcpOptions& opts) {
    if (reference < 0 || static_cast<std::size_t>(reference) >= clouds.size()) {
        throw ArgumentError("ICP reference index out of range");
    }
    std::vector<PointCloud> out(clouds.size());
    PointCloud ref = clouds[static_cast<std::size_t>(reference)];
    if (opts.precenter) ref = ref.colwise() - Eigen::Vector3d(ref.rowwise().mean());
    parallel_for(static_cast<long>(clouds.size()), [&](long i) {
        const auto k = static_cast<std::size_t>(i);
        out[k] = static_cast<int>(i) == reference ? ref : icp_register(ref, clouds[k], opts).aligned;
    });
    return out;
}

double inter_class_distance(std::span<const PointCloud> clouds, std::span<const int> labels) {
    return average_over_pairs(clouds, labels, false, "inter-class");
}

double intra_class_distance(std::span<const PointCloud> clouds, std::span<const int> labels) {
    return average_over_pairs(clouds, labels, true, "intra-class");
}

ClassDistances class_distances(std::span<const PointCloud> clouds, std::span<const int> labels) {
    return {inter_class_distance(clouds, labels), intra_class_distance(clouds, labels)};
}

VertexModel vertex_pca(std::span<const PointCloud> aligned) {
    if (aligned.size() < 2) throw ArgumentError("vertex_pca needs at least two clouds");
    const Eigen::Index m = aligned.front().cols();
    PointCloud mean = PointCloud::Zero(3, m);
    for (const PointCloud& c : aligned) {
        if (c.cols() != m) throw DimensionError("point clouds differ in size");
        mean += c;
    }
    mean /= static_cast<double>(aligned.size());
    Eigen::MatrixXd dev(3 * m, static_cast<Eigen::Index>(aligned.size()));
    for (std::size_t i = 0; i < aligned.size(); ++i) {
        const PointCloud d = aligned[i] - mean;
        dev.col(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::VectorXd>(d.data(), 3 * m);
    }
    PcaDecomposition pca = pca_of_deviations(dev);
    return {std::move(mean), std::move(pca.directions), std::move(pca.singulars)};
}

DistanceMatrix::DistanceMatrix(Eigen::MatrixXd d, std::vector<std::string> names)
    : d_(std::move(d)), names_(std::move(names)) {
    if (d_.rows() != d_.cols()) throw DimensionError("distance matrix must be square");
    if (!names_.empty() && static_cast<Eigen::Index>(names_.size()) != d_.rows()) {
        throw DimensionError("distance matrix names do not match its size");
    }
    if (!d_.allFinite()) throw ArgumentError("distance matrix has non-finite entries");
    for (Eigen::Index i = 0; i < d_.rows(); ++i) {
        if (std::abs(d_(i, i)) > 1e-10) throw ArgumentError("distance matrix diagonal must be zero");
        for (Eigen::Index j = 0; j < d_.cols(); ++j) {
            if (d_(i, j) < -1e-10) throw ArgumentError("distance matrix has negative entries");
            if (std::abs(d_(i, j) - d_(j, i)) > 1e-10) throw ArgumentError("distance matrix is not symmetric");
        }
    }
    if (names_.empty()) {
        for (Eigen::Index i = 0; i < d_.rows(); ++i) names_.push_back("s" + std::to_string(i));
    }
}

void save_distance_matrix(const DistanceMatrix& d, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out.precision(17);
    out << "id";
    for (const std::string& n : d.names()) out << ',' << n;
    out << '\n';
    for (int i = 0; i < d.size(); ++i) {
        out << d.names()[static_cast<std::size_t>(i)];
        for (int j = 0; j < d.size(); ++j) out << ',' << d(i, j);
        out << '\n';
    }
}

DistanceMatrix load_distance_matrix(const std::filesystem::path& path) {
    const csv::Table raw = csv::read(path);
    const auto n = static_cast<Eigen::Index>(raw.rows.size());
    if (static_cast<Eigen::Index>(raw.header.size()) != n + 1) {
        throw ParseError(path.string() + ": header names " + std::to_string(raw.header.size() - 1) +
                         " columns for " + std::to_string(n) + " rows");
    }
    Eigen::MatrixXd d(n, n);
    std::vector<std::string> names;
    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
        names.push_back(raw.rows[r][0]);
        for (Eigen::Index j = 0; j < n; ++j) d(static_cast<Eigen::Index>(r), j) = csv::number(raw, r, static_cast<int>(j) + 1, path);
    }
    return DistanceMatrix(std::move(d), std::move(names));
}

MdsResult classical_mds(const DistanceMatrix& dm, int k) {
    if (k < 1) throw ArgumentError("MDS dimension must be at least 1");
    const Eigen::Index n = dm.size();
    if (n == 0) throw ArgumentError("MDS of an empty distance matrix");
    const Eigen::MatrixXd d2 = dm.values().array().square().matrix();
    const Eigen::MatrixXd j = Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
    Eigen::MatrixXd b = -0.5 * j * d2 * j;
    b = 0.5 * (b + b.transpose()).eval();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);

    MdsResult out;
    out.coords = Eigen::MatrixXd::Zero(n, k);
    out.eigenvalues = Eigen::VectorXd::Zero(k);
    const double scale = std::max(eig.eigenvalues().cwiseAbs().maxCoeff(), dm.values().cwiseAbs2().maxCoeff());
    const double floor = 1e-12 * scale;
    for (int c = 0; c < k; ++c) {
        const Eigen::Index idx = n - 1 - c; // ascending order from the solver
        const double lambda = idx >= 0 ? eig.eigenvalues()[idx] : 0.0;
        if (idx < 0 || lambda <= floor) {
            out.zero_filled = true;
            continue;
        }
        out.eigenvalues[c] = lambda;
        out.coords.col(c) = eig.eigenvectors().col(idx) * std::sqrt(lambda);
    }
    return out;
}

void save_coordinates_csv(const Eigen::MatrixXd& coords, std::span<const std::string> names,
                          std::span<const int> labels, const std::filesystem::path& path) {
    if (static_cast<Eigen::Index>(names.size()) != coords.rows()) throw DimensionError("one name per row required");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out.precision(17);
    out << "id";
    if (!labels.empty()) out << ",label";
    for (Eigen::Index c = 0; c < coords.cols(); ++c) out << ",x" << c + 1;
    out << '\n';
    for (Eigen::Index i = 0; i < coords.rows(); ++i) {
        out << names[static_cast<std::size_t>(i)];
        if (!labels.empty()) out << ',' << labels[static_cast<std::size_t>(i)];
        for (Eigen::Index c = 0; c < coords.cols(); ++c) out << ',' << coords(i, c);
        out << '\n';
    }
}

double loo_1nn_accuracy(const Eigen::MatrixXd& d, std::span<const int> labels) {
    const Eigen::Index n = d.rows();
    if (d.cols() != n || static_cast<Eigen::Index>(labels.size()) != n) {
        throw DimensionError("1-NN needs a square matrix and one label per row");
    }
    if (n < 2) throw ArgumentError("1-NN needs at least two samples");
    int correct = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index best = -1;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            if (best < 0 || d(i, j) < d(i, best)) best = j;
        }
        if (labels[static_cast<std::size_t>(best)] == labels[static_cast<std::size_t>(i)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

} // namespace esa
