#include "cli.hpp"

#include "config.hpp"

#include "esa/baseline.hpp"
#include "esa/errors.hpp"
#include "esa/experiments.hpp"
#include "esa/kernels.hpp"
#include "esa/regression.hpp"
#include "esa/statistics.hpp"
#include "esa/surface_io.hpp"
#include "esa/synthetic.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>

#ifndef ESA_VERSION
#define ESA_VERSION "0.0.0"
#endif

namespace esa::cli {
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kCommands = {"simulate", "scores", "register", "mean", "pca",
                                            "export-path", "regress", "compare"};

struct Run {
    std::string command;
    json config;
    fs::path out;
    int threads = 0;
    std::optional<std::pair<int, int>> grid;
    std::vector<std::string> outputs;
    json summary = json::object();
    std::ostream* log = nullptr;

    fs::path file(const std::string& name) {
        outputs.push_back(name);
        const fs::path p = out / name;
        fs::create_directories(p.parent_path());
        return p;
    }
};

std::ofstream open_csv(const fs::path& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw InputError("cannot write '" + path.string() + "'");
    f.precision(17);
    return f;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw InputError("cannot write '" + path.string() + "'");
    f << j.dump(2) << '\n';
}

Surface read_surface(const fs::path& path, const Run& run) {
    if (!fs::exists(path)) throw InputError("input file not found: " + path.string());
    Surface f = load_surface(path);
    if (run.grid && (f.grid().n_u() != run.grid->first || f.grid().n_v() != run.grid->second)) {
        throw DimensionError(path.string() + ": grid " + std::to_string(f.grid().n_u()) + "x" +
                             std::to_string(f.grid().n_v()) + " does not match --grid");
    }
    return f;
}

std::vector<Surface> read_surfaces(const std::vector<fs::path>& paths, const Run& run) {
    std::vector<Surface> out;
    for (const fs::path& p : paths) out.push_back(read_surface(p, run));
    return out;
}

fs::path required_path(const json& c, const std::string& key) {
    if (!c.contains(key) || !c.at(key).is_string() || c.at(key).get<std::string>().empty()) {
        throw ArgumentError("config key \"" + key + "\" (input path) is required");
    }
    return c.at(key).get<std::string>();
}

std::vector<fs::path> required_list(const json& c, const std::string& key, std::size_t minimum) {
    auto list = path_list(c, key);
    if (list.size() < minimum) {
        throw ArgumentError("config key \"" + key + "\" needs at least " + std::to_string(minimum) + " input path(s)");
    }
    return list;
}

std::pair<int, int> grid_of(const Run& run) { return run.grid ? *run.grid : parse_grid(value<std::string>(run.config, "grid")); }

std::string stem_id(const fs::path& p) { return p.stem().string(); }

void write_matrix_rows(std::ofstream& f, const std::string& pipeline, const Eigen::VectorXd& singulars) {
    const Eigen::VectorXd frac = cumulative_variance(singulars);
    const Eigen::VectorXd frac2 = cumulative_variance(singulars, true);
    for (Eigen::Index d = 0; d < singulars.size(); ++d) {
        f << pipeline << ',' << d + 1 << ',' << singulars[d] << ',' << frac[d] << ',' << frac2[d] << '\n';
    }
}

// ---------------------------------------------------------------- simulate

json simulate_defaults() {
    return {{"seed", 1},
            {"grid", "32x32"},
            {"n_subjects", 40},
            {"family", family_defaults()},
            {"direction", {{"l", 2}, {"m", 0}}},
            {"scale", 1.0},
            {"diffeo", {{"magnitude", 0.2}, {"degree", 3}}},
            {"template", "mean"},
            {"registration", registration_defaults()},
            {"karcher", karcher_defaults()},
            {"mds_dims", 2}};
}

void cmd_simulate(Run& run) {
    const json& c = run.config;
    SimulationConfig s;
    std::tie(s.n_u, s.n_v) = grid_of(run);
    s.n_subjects = value<int>(c, "n_subjects");
    s.family = family_from(c.at("family"));
    s.direction_l = value<int>(c.at("direction"), "l");
    s.direction_m = value<int>(c.at("direction"), "m");
    s.scale = value<double>(c, "scale");
    s.diffeo_magnitude = value<double>(c.at("diffeo"), "magnitude");
    s.diffeo_degree = value<int>(c.at("diffeo"), "degree");
    s.registration_template = template_from(value<std::string>(c, "template"));
    s.karcher = karcher_from(c.at("karcher"), c.at("registration"));
    if (value<bool>(c.at("karcher"), "random_init")) s.karcher.seed = value<std::uint64_t>(c, "seed");
    s.mds_dims = value<int>(c, "mds_dims");
    s.seed = value<std::uint64_t>(c, "seed");

    const SimulationReport rep = run_simulation(s);
    {
        auto f = open_csv(run.file("cohort.csv"));
        f << "id,label,coefficient\n";
        for (std::size_t i = 0; i < rep.ids.size(); ++i) f << rep.ids[i] << ',' << rep.labels[i] << ',' << rep.coefficients[i] << '\n';
    }
    auto acc = open_csv(run.file("accuracy.csv"));
    acc << "stage,loo_1nn_accuracy\n";
    for (const SimulationStage& st : rep.stages) {
        save_distance_matrix(st.distances, run.file("distances_" + st.name + ".csv"));
        save_coordinates_csv(st.mds.coords, rep.ids, rep.labels, run.file("mds_" + st.name + ".csv"));
        acc << st.name << ',' << st.accuracy << '\n';
        run.summary["accuracy_" + st.name] = st.accuracy;
        run.summary["mds_zero_filled_" + st.name] = st.mds.zero_filled;
        *run.log << st.name << ": 1-NN accuracy " << st.accuracy << '\n';
    }
}

// ---------------------------------------------------------------- register

json register_defaults() {
    return {{"seed", 1}, {"fixed", ""}, {"moving", ""}, {"normalize", true}, {"registration", registration_defaults()}};
}

void cmd_register(Run& run) {
    const json& c = run.config;
    Surface f1 = read_surface(required_path(c, "fixed"), run);
    Surface f2 = read_surface(required_path(c, "moving"), run);
    require_same_grid(f1.grid(), f2.grid(), "register");
    if (value<bool>(c, "normalize")) {
        f1 = normalize(f1, false);
        f2 = normalize(f2, false);
    }
    const RegistrationResult r = register_surfaces(f1, f2, registration_from(c.at("registration")));

    save_surface(r.aligned, run.file("aligned.json"));
    export_obj(r.aligned, run.file("aligned.obj"));
    const Eigen::VectorXd& jac = r.reparam.jacobian();
    write_node_scalars_csv(f1.grid(), {jac.data(), static_cast<std::size_t>(jac.size())}, "jacobian",
                           run.file("jacobian.csv"));
    {
        auto f = open_csv(run.file("trace.csv"));
        f << "step,distance\n";
        for (std::size_t k = 0; k < r.objective_trace.size(); ++k) f << k << ',' << r.objective_trace[k] << '\n';
    }
    const Eigen::Matrix3d& o = r.rotation.matrix();
    run.summary = {{"distance", r.distance},
                   {"rotation", {{o(0, 0), o(0, 1), o(0, 2)}, {o(1, 0), o(1, 1), o(1, 2)}, {o(2, 0), o(2, 1), o(2, 2)}}},
                   {"jacobian_min", jac.minCoeff()},
                   {"jacobian_max", jac.maxCoeff()},
                   {"trace_length", r.objective_trace.size()}};
    *run.log << "shape distance " << r.distance << '\n';
}

// ---------------------------------------------------------------- mean

json mean_defaults() {
    return {{"seed", 1}, {"inputs", json::array()}, {"normalize", true}, {"registration", registration_defaults()}, {"karcher", karcher_defaults()}};
}

void cmd_mean(Run& run) {
    const json& c = run.config;
    const auto paths = required_list(c, "inputs", 1);
    std::vector<Surface> surfaces = read_surfaces(paths, run);
    if (value<bool>(c, "normalize")) {
        for (Surface& f : surfaces) f = normalize(f, false);
    }
    KarcherOptions opts = karcher_from(c.at("karcher"), c.at("registration"));
    if (value<bool>(c.at("karcher"), "random_init")) opts.seed = value<std::uint64_t>(c, "seed");
    const KarcherResult k = karcher_mean(surfaces, opts);

    save_surface(k.mean, run.file("mean.json"));
    export_obj(k.mean, run.file("mean.obj"));
    auto d = open_csv(run.file("distances.csv"));
    d << "id,file,distance\n";
    std::map<std::string, int> stems;
    for (const fs::path& p : paths) ++stems[stem_id(p)];
    for (std::size_t i = 0; i < paths.size(); ++i) {
        // file stems name the outputs; repeated stems get the input position as a prefix
        const std::string stem = stem_id(paths[i]);
        const std::string name = "registered/" + (stems[stem] > 1 ? std::to_string(i) + "_" : std::string()) + stem + ".json";
        save_surface(k.registered[i], run.file(name));
        d << stem_id(paths[i]) << ',' << name << ',' << k.distances[i] << '\n';
    }
    auto v = open_csv(run.file("karcher.csv"));
    v << "iteration,mean_squared_distance\n";
    for (std::size_t i = 0; i < k.variance_trace.size(); ++i) v << i + 1 << ',' << k.variance_trace[i] << '\n';
    run.summary = {{"initial_index", k.initial_index},
                   {"final_mean_squared_distance", k.variance_trace.empty() ? 0.0 : k.variance_trace.back()}};
}

// ---------------------------------------------------------------- pca

json pca_defaults() {
    return {{"seed", 1}, {"inputs", json::array()}, {"mean", ""}, {"raw_inputs", json::array()}, {"icp", icp_defaults()}};
}

void cmd_pca(Run& run) {
    const json& c = run.config;
    const auto paths = required_list(c, "inputs", 2);
    const std::vector<Surface> registered = read_surfaces(paths, run);
    Surface mean = registered.front();
    const std::string mean_path = value<std::string>(c, "mean");
    if (!mean_path.empty()) {
        mean = read_surface(mean_path, run);
    } else {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(mean.flat().size());
        for (const Surface& f : registered) acc += f.flat();
        mean = surface_from_flat(mean.grid(), acc / static_cast<double>(registered.size()));
    }
    const ShapeModel model = shape_pca(registered, mean);
    save_shape_model(model, run.file("model.esm"));

    auto f = open_csv(run.file("cumulative_variance.csv"));
    f << "pipeline,d,singular,fraction,fraction_squared\n";
    write_matrix_rows(f, "elastic", model.singulars);
    const auto raw_paths = path_list(c, "raw_inputs");
    if (!raw_paths.empty()) {
        if (raw_paths.size() < 2) throw ArgumentError("raw_inputs needs at least two surfaces");
        std::vector<PointCloud> clouds;
        for (const Surface& s : read_surfaces(raw_paths, run)) clouds.push_back(to_cloud(s));
        const VertexModel vm = vertex_pca(icp_align_all(clouds, 0, icp_from(c.at("icp"))));
        write_matrix_rows(f, "vertex", vm.singulars);
        run.summary["vertex_rank"] = vm.singulars.size();
    }
    run.summary["rank"] = model.rank();
    run.summary["first_fraction"] = cumulative_variance(model)[0];
}

// ---------------------------------------------------------------- scores

json scores_defaults() { return {{"seed", 1}, {"model", ""}, {"inputs", json::array()}, {"components", 0}}; }

void cmd_scores(Run& run) {
    const json& c = run.config;
    const fs::path model_path = required_path(c, "model");
    if (!fs::exists(model_path)) throw InputError("input file not found: " + model_path.string());
    const ShapeModel model = load_shape_model(model_path);
    const auto paths = required_list(c, "inputs", 1);
    int count = value<int>(c, "components");
    if (count == 0) count = model.rank();

    Eigen::MatrixXd z(static_cast<Eigen::Index>(paths.size()), count);
    std::vector<std::string> ids;
    auto rec = open_csv(run.file("reconstruction.csv"));
    rec << "id,components,relative_error\n";
    double worst = 0.0;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const Surface f = read_surface(paths[i], run);
        const Eigen::VectorXd s = pc_scores(f, model, count);
        z.row(static_cast<Eigen::Index>(i)) = s.transpose();
        ids.push_back(stem_id(paths[i]));
        const Surface back = reconstruct(s, model);
        const double denom = f.flat().norm();
        const double err = (back.flat() - f.flat()).norm() / (denom > 0.0 ? denom : 1.0);
        worst = std::max(worst, err);
        rec << ids.back() << ',' << count << ',' << err << '\n';
    }
    save_score_table(z, ids, run.file("scores.csv"));
    run.summary = {{"components", count}, {"max_relative_reconstruction_error", worst}};
    *run.log << "max relative reconstruction error " << worst << '\n';
}

// ---------------------------------------------------------------- export-path

json export_defaults() {
    return {{"seed", 1}, {"model", ""}, {"component", 1},
            {"t_values", {-1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0}}, {"target", ""}};
}

void cmd_export_path(Run& run) {
    const json& c = run.config;
    const fs::path model_path = required_path(c, "model");
    if (!fs::exists(model_path)) throw InputError("input file not found: " + model_path.string());
    const ShapeModel model = load_shape_model(model_path);
    const auto t = value<std::vector<double>>(c, "t_values");
    if (t.empty()) throw ArgumentError("t_values must not be empty");
    const int component = value<int>(c, "component");
    if (component < 1 || component > model.rank()) throw ArgumentError("component out of range");
    const std::vector<Surface> frames = pc_path(model, component, t);
    const std::string target_path = value<std::string>(c, "target");
    const Surface reference = target_path.empty() ? model.mean : read_surface(target_path, run);

    auto idx = open_csv(run.file("path.csv"));
    idx << "frame,t,mesh,diff\n";
    for (std::size_t k = 0; k < frames.size(); ++k) {
        char tag[32];
        std::snprintf(tag, sizeof tag, "frame_%03zu", k);
        const std::string mesh = std::string("frames/") + tag + ".obj";
        const std::string diff = std::string("frames/") + tag + "_diff.csv";
        export_obj(frames[k], run.file(mesh));
        const Eigen::VectorXd d = diff_field(frames[k], reference);
        write_node_scalars_csv(model.mean.grid(), {d.data(), static_cast<std::size_t>(d.size())}, "difference", run.file(diff));
        idx << k << ',' << t[k] << ',' << mesh << ',' << diff << '\n';
    }
    run.summary = {{"frames", frames.size()}, {"component", component}, {"sigma", model.singulars[component - 1]}};
}

// ---------------------------------------------------------------- regress

json regress_defaults() {
    return {{"seed", 1},
            {"covariates", ""},
            {"score_tables", json::array()},
            {"strict", true},
            {"criterion", "aic"},
            {"alpha_in", 0.05},
            {"alpha_out", 0.10},
            {"standardize", false},
            {"n_ps", 15},
            {"n_interact_ps", 5},
            {"significance", 0.05},
            {"cohort", nullptr}};
}

Criterion criterion_from(const std::string& s) {
    if (s == "aic") return Criterion::Aic;
    if (s == "bic") return Criterion::Bic;
    if (s == "pvalue") return Criterion::PValue;
    throw ArgumentError("criterion must be aic, bic or pvalue");
}

void cmd_regress(Run& run) {
    const json& c = run.config;
    SuiteOptions opts;
    opts.stepwise.criterion = criterion_from(value<std::string>(c, "criterion"));
    opts.stepwise.alpha_in = value<double>(c, "alpha_in");
    opts.stepwise.alpha_out = value<double>(c, "alpha_out");
    opts.stepwise.standardize = value<bool>(c, "standardize");
    opts.n_ps = value<int>(c, "n_ps");
    opts.n_interact_ps = value<int>(c, "n_interact_ps");
    opts.significance = value<double>(c, "significance");

    CovariateTable cov;
    ScoreSet scores;
    if (!c.at("cohort").is_null()) {
        json spec = c.at("cohort");
        if (!spec.is_object()) throw ArgumentError("config key \"cohort\" must be an object");
        if (!spec.contains("seed")) spec["seed"] = value<std::uint64_t>(c, "seed");
        if (!spec.contains("build_surfaces")) spec["build_surfaces"] = false;
        const RegressionCohort cohort = gen_regression_cohort(cohort_spec_from_json_text(spec.dump()));
        cov = cohort.covariates;
        scores = cohort.scores;
        save_covariates(cov, run.file("covariates.csv"));
        for (std::size_t s = 0; s < scores.structures.size(); ++s) {
            save_score_table(scores.scores[s], cov.id, run.file("scores_" + scores.structures[s] + ".csv"));
        }
        std::ofstream(run.file("true_model.json")) << cohort.truth.to_json() << '\n';
    } else {
        const fs::path cov_path = required_path(c, "covariates");
        if (!fs::exists(cov_path)) throw InputError("input file not found: " + cov_path.string());
        std::vector<std::string> warnings;
        cov = load_covariates(cov_path, value<bool>(c, "strict"), &warnings);
        for (const std::string& w : warnings) *run.log << "warning: " << w << '\n';
        const json& list = c.at("score_tables");
        if (!list.is_array() || list.empty()) throw ArgumentError("config key \"score_tables\" needs one {structure, path} entry per structure");
        for (const json& e : list) {
            if (!e.is_object()) throw ArgumentError("each score_tables entry must be an object {structure, path}");
            const fs::path p = required_path(e, "path");
            if (!fs::exists(p)) throw InputError("input file not found: " + p.string());
            scores.structures.push_back(value<std::string>(e, "structure"));
            scores.scores.push_back(load_score_table(p, cov.id));
        }
    }
    const std::vector<SuiteRow> rows = run_model_suite(cov, scores, opts);
    write_suite_csv(rows, run.file("suite.csv"));
    write_suite_json(rows, run.file("suite.json"));
    json adj = json::object();
    for (const SuiteRow& r : rows) adj[std::to_string(r.model)] = r.adj_r2;
    run.summary = {{"models", rows.size()}, {"adjusted_r2", adj}};
}

// ---------------------------------------------------------------- compare

json compare_defaults() {
    const CompareConfig d;
    return {{"seed", 1},
            {"grid", "24x24"},
            {"n_per_class", d.n_per_class},
            {"family", family_defaults()},
            {"class_direction", {{"l", d.class_l}, {"m", d.class_m}}},
            {"class_gap", d.class_gap},
            {"spread_direction", {{"l", d.spread_l}, {"m", d.spread_m}}},
            {"spread", d.spread},
            {"max_rotation", d.max_rotation},
            {"diffeo", {{"magnitude", d.diffeo_magnitude}, {"degree", d.diffeo_degree}}},
            {"template", "mean"},
            {"registration", registration_defaults()},
            {"karcher", karcher_defaults()},
            {"icp", icp_defaults()}};
}

void cmd_compare(Run& run) {
    const json& c = run.config;
    CompareConfig s;
    std::tie(s.n_u, s.n_v) = grid_of(run);
    s.n_per_class = value<int>(c, "n_per_class");
    s.family = family_from(c.at("family"));
    s.class_l = value<int>(c.at("class_direction"), "l");
    s.class_m = value<int>(c.at("class_direction"), "m");
    s.class_gap = value<double>(c, "class_gap");
    s.spread_l = value<int>(c.at("spread_direction"), "l");
    s.spread_m = value<int>(c.at("spread_direction"), "m");
    s.spread = value<double>(c, "spread");
    s.max_rotation = value<double>(c, "max_rotation");
    s.diffeo_magnitude = value<double>(c.at("diffeo"), "magnitude");
    s.diffeo_degree = value<int>(c.at("diffeo"), "degree");
    s.registration_template = template_from(value<std::string>(c, "template"));
    s.karcher = karcher_from(c.at("karcher"), c.at("registration"));
    if (value<bool>(c.at("karcher"), "random_init")) s.karcher.seed = value<std::uint64_t>(c, "seed");
    s.icp = icp_from(c.at("icp"));
    s.seed = value<std::uint64_t>(c, "seed");

    const CompareReport rep = run_comparison(s);
    auto f = open_csv(run.file("comparison.csv"));
    f << "pipeline,d_inter,d_intra,margin\n";
    auto cv = open_csv(run.file("cumulative_variance.csv"));
    cv << "pipeline,d,fraction\n";
    for (const PipelineSummary* p : {&rep.elastic, &rep.vertex}) {
        f << p->name << ',' << p->distances.inter << ',' << p->distances.intra << ',' << p->distances.margin() << '\n';
        for (Eigen::Index d = 0; d < p->cumulative.size(); ++d) cv << p->name << ',' << d + 1 << ',' << p->cumulative[d] << '\n';
        run.summary[p->name] = {{"d_inter", p->distances.inter}, {"d_intra", p->distances.intra}, {"margin", p->distances.margin()}};
        *run.log << p->name << ": d_inter " << p->distances.inter << ", d_intra " << p->distances.intra << '\n';
    }
    run.summary["mean_reparam_displacement"] = rep.mean_reparam_displacement;
    run.summary["class_gap_l2"] = rep.class_gap_l2;
}

struct Command {
    std::function<json()> defaults;
    std::function<void(Run&)> body;
    const char* help;
};

const std::map<std::string, Command>& commands() {
    static const std::map<std::string, Command> table = {
        {"simulate", {simulate_defaults, cmd_simulate, "Reparameterization simulation: distances, MDS, 1-NN accuracy"}},
        {"register", {register_defaults, cmd_register, "Register a moving surface to a fixed one"}},
        {"mean", {mean_defaults, cmd_mean, "Karcher mean and registered set"}},
        {"pca", {pca_defaults, cmd_pca, "Shape PCA model and cumulative variance"}},
        {"scores", {scores_defaults, cmd_scores, "Principal scores and reconstruction check"}},
        {"export-path", {export_defaults, cmd_export_path, "PC deformation path as OBJ frames"}},
        {"regress", {regress_defaults, cmd_regress, "Ten-model regression suite with stepwise selection"}},
        {"compare", {compare_defaults, cmd_compare, "Elastic vs vertex-wise (ICP) comparison"}},
    };
    return table;
}

void write_manifest(const Run& run, double seconds) {
    json m = {{"tool", "esa"},
              {"version", ESA_VERSION},
              {"command", run.command},
              {"config", run.config},
              {"threads", kernels::max_threads()},
              {"outputs", run.outputs},
              {"summary", run.summary},
              {"elapsed_seconds", seconds}};
    write_json(run.out / "manifest.json", m);
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Elastic shape analysis of spherically parameterized surfaces", "esa"};
    app.require_subcommand(1);
    std::string config_path, out_dir = "esa_out", grid_text;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--seed", seed, "Master random seed");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--threads", threads, "Worker thread cap (0 = runtime default)")->check(CLI::NonNegativeNumber);
    app.add_option("--grid", grid_text, "Grid size <n_u>x<n_v>");

    std::map<std::string, CLI::App*> subs;
    std::string fixed, moving, model, mean_path, covariates, target;
    std::vector<std::string> inputs;
    int component = 0;
    for (const auto& [name, cmd] : commands()) {
        CLI::App* s = app.add_subcommand(name, cmd.help);
        s->fallthrough();
        subs[name] = s;
    }
    subs["register"]->add_option("--fixed", fixed, "Fixed surface file");
    subs["register"]->add_option("--moving", moving, "Moving surface file");
    for (const char* name : {"mean", "pca", "scores"}) subs[name]->add_option("inputs", inputs, "Surface files");
    subs["pca"]->add_option("--mean", mean_path, "Mean surface file");
    subs["scores"]->add_option("--model", model, "Shape model file");
    subs["export-path"]->add_option("--model", model, "Shape model file");
    subs["export-path"]->add_option("--component", component, "1-based principal component");
    subs["export-path"]->add_option("--target", target, "Surface to compare frames against");
    subs["regress"]->add_option("--covariates", covariates, "Covariate CSV");

    try {
        std::vector<std::string> args;
        for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "esa: " << e.what() << '\n';
        return kConfigError;
    }

    Run run;
    run.log = &out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        for (const auto& [name, s] : subs) {
            if (s->parsed()) run.command = name;
        }
        const Command& cmd = commands().at(run.command);
        json user = json::object();
        if (!config_path.empty()) user = section_for(read_config_file(config_path), run.command, kCommands);
        json config = merge_checked(cmd.defaults(), user);
        if (seed) config["seed"] = *seed;
        if (!grid_text.empty()) {
            run.grid = parse_grid(grid_text);
            if (config.contains("grid")) config["grid"] = grid_text;
        }
        if (!fixed.empty()) config["fixed"] = fixed;
        if (!moving.empty()) config["moving"] = moving;
        if (!inputs.empty()) config["inputs"] = inputs;
        if (!mean_path.empty()) config["mean"] = mean_path;
        if (!model.empty()) config["model"] = model;
        if (component != 0) config["component"] = component;
        if (!target.empty()) config["target"] = target;
        if (!covariates.empty()) config["covariates"] = covariates;
        run.config = std::move(config);
        run.out = out_dir;
        run.threads = threads;
        kernels::set_threads(threads);
        fs::create_directories(run.out);

        cmd.body(run);
        write_manifest(run, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        return kOk;
    } catch (const ArgumentError& e) {
        err << "esa " << run.command << ": config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const InputError& e) {
        err << "esa " << run.command << ": input error: " << e.what() << '\n';
        return kInputError;
    } catch (const NumericalError& e) {
        err << "esa " << run.command << ": numerical failure: " << e.what() << '\n';
        return kNumericalError;
    } catch (const json::exception& e) {
        err << "esa " << run.command << ": config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const fs::filesystem_error& e) {
        err << "esa " << run.command << ": input error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        err << "esa " << run.command << ": numerical failure: " << e.what() << '\n';
        return kNumericalError;
    }
}

} // namespace esa::cli
