#pragma once

// End-to-end synthetic experiments shared by the CLI and the acceptance
// suite: the reparameterization simulation and the elastic vs vertex-wise
// comparison.

#include "esa/baseline.hpp"
#include "esa/registration.hpp"
#include "esa/synthetic.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace esa {

enum class Template { KarcherMean, First };

struct SimulationConfig {
    int n_u = 32;
    int n_v = 32;
    int n_subjects = 40;
    ShapeFamily family = ShapeFamily::bumpy_sphere(0.1, 3);
    /// Cohort direction: radial harmonic Y_lm, scaled by `scale`.
    int direction_l = 2;
    int direction_m = 0;
    double scale = 1.0;
    double diffeo_magnitude = 0.2;
    int diffeo_degree = 3;
    Template registration_template = Template::KarcherMean;
    KarcherOptions karcher;
    int mds_dims = 2;
    std::uint64_t seed = 1;
};

struct SimulationStage {
    std::string name;
    DistanceMatrix distances;
    MdsResult mds;
    double accuracy = 0.0;
};

struct SimulationReport {
    std::vector<double> coefficients;
    std::vector<int> labels;
    std::vector<std::string> ids;
    /// original, perturbed, registered
    std::vector<SimulationStage> stages;
    double seconds = 0.0;
};

/// Pairwise flat-measure L2 distances between surfaces on one grid.
Eigen::MatrixXd surface_distance_matrix(std::span<const Surface> surfaces);

SimulationReport run_simulation(const SimulationConfig& config);

struct CompareConfig {
    int n_u = 24;
    int n_v = 24;
    int n_per_class = 10;
    ShapeFamily family = ShapeFamily::bumpy_sphere(0.1, 3);
    /// Classes sit at -gap/2 and +gap/2 along a radial harmonic direction.
    int class_l = 2;
    int class_m = 0;
    double class_gap = 0.6;
    /// Within-class spread along a second direction.
    int spread_l = 3;
    int spread_m = 1;
    double spread = 0.2;
    /// Every subject is also rotated by up to this angle (radians).
    double max_rotation = 0.3;
    double diffeo_magnitude = 0.2;
    int diffeo_degree = 3;
    Template registration_template = Template::KarcherMean;
    KarcherOptions karcher;
    IcpOptions icp;
    std::uint64_t seed = 1;
};

struct PipelineSummary {
    std::string name;
    ClassDistances distances;
    Eigen::VectorXd cumulative; ///< cumulative singular-value fraction
};

struct CompareReport {
    std::vector<int> labels;
    PipelineSummary elastic;
    PipelineSummary vertex;
    /// Parameterization noise and class gap in the flat L2 norm, for the record.
    double mean_reparam_displacement = 0.0;
    double class_gap_l2 = 0.0;
    double seconds = 0.0;
};

CompareReport run_comparison(const CompareConfig& config);

/// Grid nodes of a surface as a point cloud.
inline PointCloud to_cloud(const Surface& f) { return f.points(); }

} // namespace esa
