#include "esa/experiments.hpp"

#include "esa/errors.hpp"
#include "esa/kernels.hpp"
#include "esa/parallel.hpp"
#include "esa/rng.hpp"

#include <Eigen/Geometry>

#include <chrono>
#include <cmath>

namespace esa {
namespace {

constexpr std::uint64_t kDiffeoStream = 0x5eed'0001;
constexpr std::uint64_t kRotationStream = 0x5eed'0002;
constexpr std::uint64_t kCohortStream = 0x5eed'0003;

std::vector<Surface> perturb(std::span<const Surface> surfaces, std::uint64_t seed, double magnitude, int degree) {
    std::vector<Surface> out(surfaces.begin(), surfaces.end());
    parallel_for(static_cast<long>(surfaces.size()), [&](long i) {
        const auto k = static_cast<std::size_t>(i);
        const std::uint64_t s = mix_seed(seed ^ kDiffeoStream) + static_cast<std::uint64_t>(i);
        out[k] = pullback(surfaces[k], random_diffeo(surfaces[k].grid(), s, magnitude, degree));
    });
    return out;
}

/// Registers everything to a template; returns the registered surfaces and
/// the template the PCA should be centred on.
std::pair<std::vector<Surface>, Surface> register_to_template(std::span<const Surface> surfaces, Template t,
                                                              const KarcherOptions& opts) {
    if (t == Template::KarcherMean) {
        KarcherResult k = karcher_mean(surfaces, opts);
        return {std::move(k.registered), std::move(k.mean)};
    }
    std::vector<RegistrationResult> rr = register_batch(surfaces.front(), surfaces, opts.registration);
    std::vector<Surface> out;
    out.reserve(rr.size());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(surfaces.front().flat().size());
    for (RegistrationResult& r : rr) {
        mean += r.aligned.flat();
        out.push_back(std::move(r.aligned));
    }
    mean /= static_cast<double>(out.size());
    return {std::move(out), surface_from_flat(surfaces.front().grid(), mean)};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

Eigen::MatrixXd surface_distance_matrix(std::span<const Surface> surfaces) {
    if (surfaces.empty()) return {};
    const SphericalGrid& g = surfaces.front().grid();
    Eigen::MatrixXd m(3 * g.size(), static_cast<Eigen::Index>(surfaces.size()));
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
        require_same_grid(g, surfaces[i].grid(), "distance matrix");
        m.col(static_cast<Eigen::Index>(i)) = surfaces[i].flat();
    }
    return kernels::pairwise_distances(m, std::sqrt(g.cell()));
}

SimulationReport run_simulation(const SimulationConfig& c) {
    const auto t0 = std::chrono::steady_clock::now();
    if (c.n_subjects < 2) throw ArgumentError("simulation needs at least two subjects");
    if (c.mds_dims < 1) throw ArgumentError("mds_dims must be at least 1");
    const SphericalGrid grid(c.n_u, c.n_v);
    const Surface mean = normalize(gen_surface(c.family, grid), false);
    const Eigen::VectorXd dir = radial_harmonic_direction(grid, c.direction_l, c.direction_m);
    PcaCohort cohort = gen_pca_cohort(mean, dir, c.n_subjects, mix_seed(c.seed ^ kCohortStream), c.scale);

    SimulationReport rep;
    rep.coefficients = cohort.coefficients;
    rep.labels = cohort.labels;
    for (int i = 0; i < c.n_subjects; ++i) rep.ids.push_back("s" + std::to_string(i + 1));

    const std::vector<Surface> perturbed = perturb(cohort.surfaces, c.seed, c.diffeo_magnitude, c.diffeo_degree);
    const std::vector<Surface> registered =
        register_to_template(perturbed, c.registration_template, c.karcher).first;

    const std::pair<const char*, const std::vector<Surface>*> stages[] = {
        {"original", &cohort.surfaces}, {"perturbed", &perturbed}, {"registered", &registered}};
    for (const auto& [name, set] : stages) {
        SimulationStage st;
        st.name = name;
        st.distances = DistanceMatrix(surface_distance_matrix(*set), rep.ids);
        st.mds = classical_mds(st.distances, c.mds_dims);
        st.accuracy = loo_1nn_accuracy(st.distances.values(), rep.labels);
        rep.stages.push_back(std::move(st));
    }
    rep.seconds = seconds_since(t0);
    return rep;
}

CompareReport run_comparison(const CompareConfig& c) {
    const auto t0 = std::chrono::steady_clock::now();
    if (c.n_per_class < 2) throw ArgumentError("comparison needs at least two subjects per class");
    const SphericalGrid grid(c.n_u, c.n_v);
    const Surface mean = normalize(gen_surface(c.family, grid), false);
    const Eigen::VectorXd class_dir = radial_harmonic_direction(grid, c.class_l, c.class_m);
    const Eigen::VectorXd spread_dir = radial_harmonic_direction(grid, c.spread_l, c.spread_m);

    const int n = 2 * c.n_per_class;
    CompareReport rep;
    std::vector<Surface> clean;
    std::vector<Eigen::Matrix3d> rotations;
    for (int i = 0; i < n; ++i) {
        const int label = i < c.n_per_class ? 0 : 1;
        Rng rng = Rng::stream(mix_seed(c.seed ^ kCohortStream), static_cast<std::uint64_t>(i));
        const double u = rng.uniform(-1.0, 1.0);
        const Eigen::VectorXd flat =
            mean.flat() + (label == 1 ? 0.5 : -0.5) * c.class_gap * class_dir + c.spread * u * spread_dir;
        clean.push_back(surface_from_flat(grid, flat));
        rep.labels.push_back(label);

        Rng rot = Rng::stream(mix_seed(c.seed ^ kRotationStream), static_cast<std::uint64_t>(i));
        Eigen::Vector3d axis(rot.normal(), rot.normal(), rot.normal());
        axis.normalize();
        rotations.push_back(Eigen::AngleAxisd(rot.uniform(-c.max_rotation, c.max_rotation), axis).toRotationMatrix());
    }
    std::vector<Surface> observed = perturb(clean, c.seed, c.diffeo_magnitude, c.diffeo_degree);
    double disp = 0.0;
    for (int i = 0; i < n; ++i) {
        disp += l2_distance(observed[static_cast<std::size_t>(i)], clean[static_cast<std::size_t>(i)]);
        observed[static_cast<std::size_t>(i)] = rotate(observed[static_cast<std::size_t>(i)], rotations[static_cast<std::size_t>(i)]);
    }
    rep.mean_reparam_displacement = disp / n;
    rep.class_gap_l2 = c.class_gap * std::sqrt(grid.cell());

    // Elastic pipeline.
    auto [registered, centre] = register_to_template(observed, c.registration_template, c.karcher);
    std::vector<PointCloud> elastic_clouds;
    for (const Surface& f : registered) elastic_clouds.push_back(to_cloud(f));
    rep.elastic.name = "elastic";
    rep.elastic.distances = class_distances(elastic_clouds, rep.labels);
    rep.elastic.cumulative = cumulative_variance(shape_pca(registered, centre));

    // Vertex-wise pipeline.
    std::vector<PointCloud> raw;
    for (const Surface& f : observed) raw.push_back(to_cloud(f));
    const std::vector<PointCloud> aligned = icp_align_all(raw, 0, c.icp);
    rep.vertex.name = "vertex";
    rep.vertex.distances = class_distances(aligned, rep.labels);
    rep.vertex.cumulative = cumulative_variance(vertex_pca(aligned).singulars);

    rep.seconds = seconds_since(t0);
    return rep;
}

} // namespace esa
