#include "esa/statistics.hpp"

#include "esa/errors.hpp"
#include "esa/parallel.hpp"
#include "esa/rng.hpp"

#include <Eigen/SVD>

#include <string>

namespace esa {

Surface geodesic(const Surface& f1, const Surface& f2_star, double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) {
        throw ArgumentError("geodesic time " + std::to_string(tau) + " outside [0, 1]");
    }
    require_same_grid(f1.grid(), f2_star.grid(), "geodesic");
    if (tau == 0.0) return f1;
    if (tau == 1.0) return f2_star;
    return Surface(f1.grid(), (1.0 - tau) * f1.points() + tau * f2_star.points());
}

std::vector<RegistrationResult> register_batch_serial(const Surface& reference,
                                                      std::span<const Surface> surfaces,
                                                      const RegistrationOptions& opts) {
    std::vector<RegistrationResult> out;
    out.reserve(surfaces.size());
    for (const Surface& f : surfaces) out.push_back(register_surfaces(reference, f, opts));
    return out;
}

std::vector<RegistrationResult> register_batch(const Surface& reference, std::span<const Surface> surfaces,
                                               const RegistrationOptions& opts) {
    std::vector<std::optional<RegistrationResult>> slots(surfaces.size());
    parallel_for(static_cast<long>(surfaces.size()), [&](long i) {
        const auto k = static_cast<std::size_t>(i);
        slots[k] = register_surfaces(reference, surfaces[k], opts);
    });
    std::vector<RegistrationResult> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

KarcherResult karcher_mean(std::span<const Surface> surfaces, const KarcherOptions& opts) {
    if (surfaces.empty()) throw ArgumentError("karcher_mean needs at least one surface");
    for (const Surface& f : surfaces) require_same_grid(surfaces.front().grid(), f.grid(), "karcher_mean");

    int start = opts.initial_index;
    if (opts.seed) {
        Rng rng(*opts.seed);
        start = static_cast<int>(rng.bits() % surfaces.size());
    }
    if (start < 0 || static_cast<std::size_t>(start) >= surfaces.size()) {
        throw ArgumentError("karcher_mean initial index " + std::to_string(start) + " out of range");
    }

    const double n = static_cast<double>(surfaces.size());
    Surface mean = surfaces[static_cast<std::size_t>(start)];
    std::vector<double> variance;
    for (int it = 0; it < opts.iterations; ++it) {
        const auto results = register_batch(mean, surfaces, opts.registration);
        VectorField sum = VectorField::Zero(3, mean.grid().size());
        double sq = 0.0;
        for (const auto& r : results) {
            sum += r.aligned.points();
            sq += r.distance * r.distance;
        }
        variance.push_back(sq / n);
        mean = Surface(mean.grid(), sum / n);
    }

    auto final_pass = register_batch(mean, surfaces, opts.registration);
    KarcherResult out{mean, {}, {}, std::move(variance), start};
    out.registered.reserve(final_pass.size());
    for (auto& r : final_pass) {
        out.distances.push_back(r.distance);
        out.registered.push_back(std::move(r.aligned));
    }
    return out;
}

PcaDecomposition pca_of_deviations(const Eigen::MatrixXd& deviations) {
    if (deviations.cols() < 2) throw ArgumentError("PCA needs at least two samples");
    const Eigen::BDCSVD<Eigen::MatrixXd> svd(deviations, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

ShapeModel shape_pca(std::span<const Surface> registered, const Surface& mean) {
    if (registered.size() < 2) throw ArgumentError("shape_pca needs at least two surfaces");
    Eigen::MatrixXd dev(3 * mean.grid().size(), static_cast<Eigen::Index>(registered.size()));
    for (std::size_t i = 0; i < registered.size(); ++i) {
        require_same_grid(mean.grid(), registered[i].grid(), "shape_pca");
        dev.col(static_cast<Eigen::Index>(i)) = registered[i].flat() - mean.flat();
    }
    PcaDecomposition pca = pca_of_deviations(dev);
    return {mean, std::move(pca.directions), std::move(pca.singulars)};
}

Eigen::VectorXd pc_scores(const Surface& f, const ShapeModel& model, int count) {
    if (count < 0 || count > model.rank()) {
        throw ArgumentError("requested " + std::to_string(count) + " scores, model stores " +
                            std::to_string(model.rank()) + " directions");
    }
    require_same_grid(model.mean.grid(), f.grid(), "pc_scores");
    const Eigen::VectorXd dev = f.flat() - model.mean.flat();
    return model.directions.leftCols(count).transpose() * dev;
}

Surface reconstruct(const Eigen::VectorXd& scores, const ShapeModel& model) {
    if (scores.size() > model.rank()) {
        throw ArgumentError("score vector longer than the number of stored directions");
    }
    const Eigen::VectorXd flat = model.mean.flat() + model.directions.leftCols(scores.size()) * scores;
    return surface_from_flat(model.mean.grid(), flat);
}

Eigen::VectorXd cumulative_variance(const Eigen::VectorXd& singulars, bool squared) {
    if (singulars.size() == 0) throw ArgumentError("cumulative_variance of an empty spectrum");
    Eigen::VectorXd v = squared ? Eigen::VectorXd(singulars.array().square()) : singulars;
    const double total = v.sum();
    Eigen::VectorXd out(v.size());
    double run = 0.0;
    for (Eigen::Index d = 0; d < v.size(); ++d) {
        run += v[d];
        out[d] = total > 0.0 ? run / total : 0.0;
    }
    return out;
}

std::vector<Surface> pc_path(const ShapeModel& model, int component, std::span<const double> t_values) {
    if (component < 1 || component > model.rank()) {
        throw ArgumentError("principal component " + std::to_string(component) + " out of range 1.." +
                            std::to_string(model.rank()));
    }
    const auto c = static_cast<Eigen::Index>(component - 1);
    const Eigen::VectorXd step = model.singulars[c] * model.directions.col(c);
    std::vector<Surface> out;
    out.reserve(t_values.size());
    for (double t : t_values) out.push_back(surface_from_flat(model.mean.grid(), model.mean.flat() + t * step));
    return out;
}

Eigen::VectorXd diff_field(const Surface& f_hat, const Surface& f) {
    require_same_grid(f_hat.grid(), f.grid(), "diff_field");
    return (f_hat.points() - f.points()).colwise().norm().transpose();
}

} // namespace esa
