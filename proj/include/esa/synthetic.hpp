#pragma once

// Seeded generators: analytic shapes, one-direction PCA cohorts and
// regression cohorts with a recorded true model.

#include "esa/regression.hpp"
#include "esa/statistics.hpp"
#include "esa/surface.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace esa {

struct ShapeFamily {
    enum class Kind { Sphere, Ellipsoid, BumpySphere };
    Kind kind = Kind::Sphere;
    double a = 1.0, b = 1.0, c = 1.0; ///< ellipsoid semi-axes along x, y, z
    double amplitude = 0.0;           ///< bumpy sphere
    int degree = 0;                   ///< bumpy sphere: harmonics l = 1..degree

    static ShapeFamily sphere() { return {}; }
    static ShapeFamily ellipsoid(double a, double b, double c);
    static ShapeFamily bumpy_sphere(double amplitude, int degree);
};

/// Sphere, axis-aligned ellipsoid, or radius 1 + amplitude * sum_{l<=degree,m} Y_lm.
/// Throws ArgumentError for nonpositive axes or a radius that reaches zero.
Surface gen_surface(const ShapeFamily& family, const SphericalGrid& grid);

/// Unit flattened direction moving every node radially by Y_lm(s) * s.
Eigen::VectorXd radial_harmonic_direction(const SphericalGrid& grid, int l, int m);

struct PcaCohort {
    std::vector<Surface> surfaces;
    std::vector<double> coefficients;
    /// 1 for positive coefficients, 0 for negative ones.
    std::vector<int> labels;
};

/// f_i = mean + scale * x_i * direction. The first ceil(n/2) subjects draw
/// x_i uniform on (0, 1], the rest uniform on [-1, 0); every subject uses its
/// own stream of `seed`.
PcaCohort gen_pca_cohort(const Surface& mean, const Eigen::VectorXd& direction, int n, std::uint64_t seed,
                         double scale = 1.0);

struct TrueTerm {
    Term term;
    double coefficient = 0.0;
};

struct CohortSpec {
    int n_subjects = 60;
    int n_u = 16;
    int n_v = 16;
    ShapeFamily family = ShapeFamily::sphere();
    int n_structures = 1;
    /// Known shape model per structure: radial harmonic directions with score
    /// standard deviations score_sd * score_decay^(d - 1).
    int n_components = 15;
    double score_sd = 0.1;
    double score_decay = 0.8;

    // covariate laws
    double age_min = 18.0, age_max = 65.0;
    double bdi_min = 0.0, bdi_max = 40.0;
    double icv_mean = 1500.0, icv_sd = 120.0;

    // response rule
    Response response = Response::Pss;
    double intercept = 20.0;
    double age_coef = 0.0;
    double bdi_coef = 0.0;
    double icv_coef = 0.0;
    std::vector<TrueTerm> terms;
    /// Noise standard deviation; when snr > 0 it is set instead to
    /// sd(shape signal) / snr, the shape signal being the sum of the terms.
    double noise_sd = 1.0;
    double snr = 0.0;
    /// Label 1 when the response is at least this value.
    double label_threshold = 20.0;

    bool build_surfaces = true;
    std::uint64_t seed = 1;
};

/// Throws ArgumentError on invalid specs.
void validate_cohort_spec(const CohortSpec& spec);
CohortSpec load_cohort_spec(const std::filesystem::path& path);
CohortSpec cohort_spec_from_json_text(const std::string& text);

struct TrueModel {
    Response response = Response::Pss;
    double intercept = 0.0;
    double age_coef = 0.0;
    double bdi_coef = 0.0;
    double icv_coef = 0.0;
    std::vector<TrueTerm> terms;
    double noise_sd = 0.0;
    std::string to_json() const;
};

struct RegressionCohort {
    /// surfaces[structure][subject]; empty when build_surfaces is off.
    std::vector<std::vector<Surface>> surfaces;
    std::vector<ShapeModel> models;
    CovariateTable covariates;
    ScoreSet scores;
    TrueModel truth;
};

RegressionCohort gen_regression_cohort(const CohortSpec& spec);

} // namespace esa
