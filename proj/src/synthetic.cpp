#include "esa/synthetic.hpp"

#include "esa/errors.hpp"
#include "esa/harmonics.hpp"
#include "esa/rng.hpp"

#include <algorithm>

#include "json.hpp"

#include <Eigen/QR>

#include <cmath>
#include <fstream>
#include <sstream>

namespace esa {
namespace {

using nlohmann::json;

const char* kind_key(TermKind k) {
    switch (k) {
    case TermKind::Ps: return "ps";
    case TermKind::AgeByPs: return "age_ps";
    case TermKind::BdiByPs: return "bdi_ps";
    default: return "covariate";
    }
}

TermKind kind_from_key(const std::string& s) {
    if (s == "ps") return TermKind::Ps;
    if (s == "age_ps") return TermKind::AgeByPs;
    if (s == "bdi_ps") return TermKind::BdiByPs;
    throw ArgumentError("cohort term kind must be ps, age_ps or bdi_ps, got \"" + s + "\"");
}

template <class T>
void read_opt(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ArgumentError(std::string("cohort config: field \"") + key + "\" has the wrong type");
    }
}

double term_value(const Term& t, const CovariateTable& cov, const ScoreSet& scores, int i) {
    const double z = scores.scores[static_cast<std::size_t>(t.structure)](i, t.component - 1);
    switch (t.kind) {
    case TermKind::Ps: return z;
    case TermKind::AgeByPs: return cov.age[i] * z;
    case TermKind::BdiByPs: return cov.bdi[i] * z;
    default: throw ArgumentError("cohort terms must involve principal scores");
    }
}

Eigen::MatrixXd harmonic_directions(const SphericalGrid& grid, int count) {
    Eigen::MatrixXd raw(3 * grid.size(), count);
    int col = 0;
    for (int l = 1; col < count; ++l) {
        for (int m = -l; m <= l && col < count; ++m) raw.col(col++) = radial_harmonic_direction(grid, l, m);
    }
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(raw.rows(), count);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(count).triangularView<Eigen::Upper>();
    for (int k = 0; k < count; ++k) {
        if (r(k, k) < 0.0) q.col(k) *= -1.0;
    }
    return q;
}

} // namespace

ShapeFamily ShapeFamily::ellipsoid(double a, double b, double c) {
    ShapeFamily f;
    f.kind = Kind::Ellipsoid;
    f.a = a;
    f.b = b;
    f.c = c;
    return f;
}

ShapeFamily ShapeFamily::bumpy_sphere(double amplitude, int degree) {
    ShapeFamily f;
    f.kind = Kind::BumpySphere;
    f.amplitude = amplitude;
    f.degree = degree;
    return f;
}

Surface gen_surface(const ShapeFamily& family, const SphericalGrid& grid) {
    const Eigen::Matrix3Xd& s = grid.nodes();
    VectorField pts(3, grid.size());
    switch (family.kind) {
    case ShapeFamily::Kind::Sphere:
        pts = s;
        break;
    case ShapeFamily::Kind::Ellipsoid:
        if (!(family.a > 0.0 && family.b > 0.0 && family.c > 0.0)) {
            throw ArgumentError("ellipsoid semi-axes must be positive");
        }
        pts = Eigen::Vector3d(family.a, family.b, family.c).asDiagonal() * s;
        break;
    case ShapeFamily::Kind::BumpySphere: {
        if (family.degree < 0) throw ArgumentError("bumpy sphere degree must be nonnegative");
        if (!std::isfinite(family.amplitude)) throw ArgumentError("bumpy sphere amplitude must be finite");
        std::vector<double> y(static_cast<std::size_t>(harmonic_count(family.degree)));
        for (int k = 0; k < grid.size(); ++k) {
            double sum = 0.0;
            if (family.degree > 0) {
                real_harmonics(family.degree, s.col(k), y);
                for (double v : y) sum += v;
            }
            const double r = 1.0 + family.amplitude * sum;
            if (r <= 0.0) throw ArgumentError("bumpy sphere amplitude makes the radius nonpositive");
            pts.col(k) = r * s.col(k);
        }
        break;
    }
    }
    return Surface(grid, std::move(pts));
}

Eigen::VectorXd radial_harmonic_direction(const SphericalGrid& grid, int l, int m) {
    if (l < 0 || m < -l || m > l) throw ArgumentError("invalid harmonic index");
    Eigen::VectorXd v(3 * grid.size());
    const Eigen::Matrix3Xd& s = grid.nodes();
    for (int k = 0; k < grid.size(); ++k) v.segment<3>(3 * k) = real_harmonic(l, m, s.col(k)) * s.col(k);
    const double n = v.norm();
    if (n == 0.0) throw ArgumentError("harmonic vanishes on this grid");
    return v / n;
}

PcaCohort gen_pca_cohort(const Surface& mean, const Eigen::VectorXd& direction, int n, std::uint64_t seed,
                         double scale) {
    if (n < 0) throw ArgumentError("cohort size must be nonnegative");
    if (direction.size() != 3 * mean.grid().size()) throw DimensionError("direction length does not match the grid");
    if (std::abs(direction.norm() - 1.0) > 1e-8) throw ArgumentError("cohort direction must be a unit vector");
    PcaCohort out;
    const int positive = (n + 1) / 2;
    for (int i = 0; i < n; ++i) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
        const double mag = rng.uniform_open_closed();
        const double x = i < positive ? mag : -mag;
        out.coefficients.push_back(x);
        out.labels.push_back(i < positive ? 1 : 0);
        out.surfaces.push_back(surface_from_flat(mean.grid(), mean.flat() + (scale * x) * direction));
    }
    return out;
}

void validate_cohort_spec(const CohortSpec& s) {
    auto need = [](bool ok, const std::string& msg) {
        if (!ok) throw ArgumentError("cohort config: " + msg);
    };
    need(s.n_subjects >= 2, "n_subjects must be at least 2");
    need(s.n_u >= SphericalGrid::kMinNodes && s.n_v >= SphericalGrid::kMinNodes, "grid must be at least 8x8");
    need(s.n_structures >= 1, "n_structures must be at least 1");
    need(s.n_components >= 1 && s.n_components < 3 * s.n_u * s.n_v, "n_components out of range");
    need(s.score_sd > 0.0 && std::isfinite(s.score_sd), "score_sd must be positive");
    need(s.score_decay > 0.0 && std::isfinite(s.score_decay), "score_decay must be positive");
    need(s.age_min <= s.age_max && std::isfinite(s.age_min) && std::isfinite(s.age_max), "bad age range");
    need(s.bdi_min <= s.bdi_max && std::isfinite(s.bdi_min) && std::isfinite(s.bdi_max), "bad bdi range");
    need(std::isfinite(s.icv_mean) && s.icv_sd >= 0.0 && std::isfinite(s.icv_sd), "bad icv law");
    need(std::isfinite(s.intercept) && std::isfinite(s.age_coef) && std::isfinite(s.bdi_coef) &&
             std::isfinite(s.icv_coef),
         "coefficients must be finite");
    need(s.noise_sd >= 0.0 && std::isfinite(s.noise_sd), "noise_sd must be nonnegative");
    need(s.snr >= 0.0 && std::isfinite(s.snr), "snr must be nonnegative");
    for (const TrueTerm& t : s.terms) {
        need(!t.term.forced(), "true terms must involve principal scores");
        need(t.term.structure >= 0 && t.term.structure < s.n_structures, "term structure out of range");
        need(t.term.component >= 1 && t.term.component <= s.n_components, "term component out of range");
        need(std::isfinite(t.coefficient), "term coefficients must be finite");
    }
}

CohortSpec cohort_spec_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("cohort config: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("cohort config must be a JSON object");
    static const char* const known[] = {"n_subjects", "n_u", "n_v", "family", "n_structures", "n_components",
                                        "score_sd", "score_decay", "age_min", "age_max", "bdi_min", "bdi_max",
                                        "icv_mean", "icv_sd", "response", "intercept", "age_coef", "bdi_coef",
                                        "icv_coef", "terms", "noise_sd", "snr", "label_threshold",
                                        "build_surfaces", "seed"};
    for (const auto& item : j.items()) {
        if (std::find(std::begin(known), std::end(known), item.key()) == std::end(known)) {
            throw ArgumentError("cohort config: unknown key \"" + item.key() + "\"");
        }
    }
    CohortSpec s;
    read_opt(j, "n_subjects", s.n_subjects);
    read_opt(j, "n_u", s.n_u);
    read_opt(j, "n_v", s.n_v);
    if (j.contains("family")) {
        const json& f = j.at("family");
        std::string kind = "sphere";
        read_opt(f, "kind", kind);
        if (kind == "sphere") {
            s.family = ShapeFamily::sphere();
        } else if (kind == "ellipsoid") {
            double a = 1, b = 1, c = 1;
            read_opt(f, "a", a);
            read_opt(f, "b", b);
            read_opt(f, "c", c);
            s.family = ShapeFamily::ellipsoid(a, b, c);
        } else if (kind == "bumpy_sphere") {
            double amp = 0.1;
            int degree = 3;
            read_opt(f, "amplitude", amp);
            read_opt(f, "degree", degree);
            s.family = ShapeFamily::bumpy_sphere(amp, degree);
        } else {
            throw ArgumentError("cohort config: unknown family \"" + kind + "\"");
        }
    }
    read_opt(j, "n_structures", s.n_structures);
    read_opt(j, "n_components", s.n_components);
    read_opt(j, "score_sd", s.score_sd);
    read_opt(j, "score_decay", s.score_decay);
    read_opt(j, "age_min", s.age_min);
    read_opt(j, "age_max", s.age_max);
    read_opt(j, "bdi_min", s.bdi_min);
    read_opt(j, "bdi_max", s.bdi_max);
    read_opt(j, "icv_mean", s.icv_mean);
    read_opt(j, "icv_sd", s.icv_sd);
    if (j.contains("response")) {
        std::string r;
        read_opt(j, "response", r);
        if (r == "pss") s.response = Response::Pss;
        else if (r == "ctqtot") s.response = Response::Ctqtot;
        else throw ArgumentError("cohort config: response must be pss or ctqtot");
    }
    read_opt(j, "intercept", s.intercept);
    read_opt(j, "age_coef", s.age_coef);
    read_opt(j, "bdi_coef", s.bdi_coef);
    read_opt(j, "icv_coef", s.icv_coef);
    if (j.contains("terms")) {
        if (!j.at("terms").is_array()) throw ArgumentError("cohort config: terms must be an array");
        for (const json& t : j.at("terms")) {
            TrueTerm tt;
            std::string kind = "ps";
            read_opt(t, "kind", kind);
            tt.term.kind = kind_from_key(kind);
            read_opt(t, "structure", tt.term.structure);
            read_opt(t, "component", tt.term.component);
            read_opt(t, "coefficient", tt.coefficient);
            s.terms.push_back(tt);
        }
    }
    read_opt(j, "noise_sd", s.noise_sd);
    read_opt(j, "snr", s.snr);
    read_opt(j, "label_threshold", s.label_threshold);
    read_opt(j, "build_surfaces", s.build_surfaces);
    read_opt(j, "seed", s.seed);
    validate_cohort_spec(s);
    return s;
}

CohortSpec load_cohort_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return cohort_spec_from_json_text(ss.str());
}

std::string TrueModel::to_json() const {
    json terms_j = json::array();
    for (const TrueTerm& t : terms) {
        terms_j.push_back({{"name", t.term.name()},
                           {"kind", kind_key(t.term.kind)},
                           {"structure", t.term.structure},
                           {"component", t.term.component},
                           {"coefficient", t.coefficient}});
    }
    const json j = {{"response", response_name(response)},
                    {"intercept", intercept},
                    {"age", age_coef},
                    {"bdi", bdi_coef},
                    {"icv", icv_coef},
                    {"terms", terms_j},
                    {"noise_sd", noise_sd}};
    return j.dump(2);
}

RegressionCohort gen_regression_cohort(const CohortSpec& spec) {
    validate_cohort_spec(spec);
    const SphericalGrid grid(spec.n_u, spec.n_v);
    const int n = spec.n_subjects;
    const int k = spec.n_components;

    RegressionCohort out;
    CovariateTable& cov = out.covariates;
    cov.age.resize(n);
    cov.bdi.resize(n);
    cov.icv.resize(n);
    cov.pss.resize(n);
    cov.ctqtot.resize(n);
    cov.label.assign(static_cast<std::size_t>(n), 0);
    for (int s = 0; s < spec.n_structures; ++s) {
        out.scores.structures.push_back("structure" + std::to_string(s + 1));
        out.scores.scores.emplace_back(n, k);
    }

    Eigen::VectorXd sd(k);
    for (int d = 0; d < k; ++d) sd[d] = spec.score_sd * std::pow(spec.score_decay, d);

    Eigen::VectorXd noise(n);
    for (int i = 0; i < n; ++i) {
        Rng rng = Rng::stream(spec.seed, static_cast<std::uint64_t>(i));
        cov.id.push_back("sub" + std::to_string(i + 1));
        cov.age[i] = rng.uniform(spec.age_min, spec.age_max);
        cov.bdi[i] = rng.uniform(spec.bdi_min, spec.bdi_max);
        cov.icv[i] = rng.normal(spec.icv_mean, spec.icv_sd);
        const double other = spec.response == Response::Pss ? rng.uniform(25.0, 125.0) : rng.uniform(0.0, 42.0);
        (spec.response == Response::Pss ? cov.ctqtot : cov.pss)[i] = other;
        for (int s = 0; s < spec.n_structures; ++s) {
            for (int d = 0; d < k; ++d) out.scores.scores[static_cast<std::size_t>(s)](i, d) = rng.normal(0.0, sd[d]);
        }
        noise[i] = rng.normal();
    }

    Eigen::VectorXd shape_signal = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        for (const TrueTerm& t : spec.terms) shape_signal[i] += t.coefficient * term_value(t.term, cov, out.scores, i);
    }
    double noise_sd = spec.noise_sd;
    if (spec.snr > 0.0) {
        const double centred = std::sqrt((shape_signal.array() - shape_signal.mean()).square().sum() / (n - 1));
        if (centred == 0.0) throw ArgumentError("cohort config: snr needs at least one nonzero shape term");
        noise_sd = centred / spec.snr;
    }
    Eigen::VectorXd y = Eigen::VectorXd::Constant(n, spec.intercept) + spec.age_coef * cov.age +
                        spec.bdi_coef * cov.bdi + spec.icv_coef * cov.icv + shape_signal + noise_sd * noise;
    (spec.response == Response::Pss ? cov.pss : cov.ctqtot) = y;
    for (int i = 0; i < n; ++i) cov.label[static_cast<std::size_t>(i)] = y[i] >= spec.label_threshold ? 1 : 0;

    out.truth = {spec.response, spec.intercept, spec.age_coef, spec.bdi_coef, spec.icv_coef, spec.terms, noise_sd};

    const Surface mean = gen_surface(spec.family, grid);
    const Eigen::MatrixXd dirs = harmonic_directions(grid, k);
    for (int s = 0; s < spec.n_structures; ++s) {
        out.models.push_back({mean, dirs, sd});
        if (!spec.build_surfaces) continue;
        std::vector<Surface> subjects;
        subjects.reserve(static_cast<std::size_t>(n));
        const Eigen::MatrixXd& z = out.scores.scores[static_cast<std::size_t>(s)];
        for (int i = 0; i < n; ++i) {
            subjects.push_back(surface_from_flat(grid, mean.flat() + dirs * z.row(i).transpose()));
        }
        out.surfaces.push_back(std::move(subjects));
    }
    return out;
}

} // namespace esa
