#include "esa/errors.hpp"
#include "esa/regression.hpp"

#include "csv.hpp"
#include "json.hpp"

#include <cmath>
#include <fstream>
#include <map>

namespace esa {
namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out.precision(17);
    return out;
}

struct Range {
    const char* name;
    const Eigen::VectorXd* values;
    double lo;
    double hi;
};

} // namespace

std::vector<std::string> validate_covariates(const CovariateTable& t, bool strict) {
    std::vector<std::string> warnings;
    const int n = t.size();
    const Range ranges[] = {
        {"age", &t.age, 0.0, INFINITY},     {"bdi", &t.bdi, 0.0, 63.0},
        {"icv", &t.icv, 0.0, INFINITY},     {"pss", &t.pss, 0.0, 42.0},
        {"ctqtot", &t.ctqtot, 25.0, 125.0},
    };
    auto flag = [&](const std::string& msg) {
        if (strict) throw InputError(msg);
        warnings.push_back(msg);
    };
    for (const Range& r : ranges) {
        if (r.values->size() != n) throw DimensionError(std::string("covariate column ") + r.name + " has the wrong length");
        for (int i = 0; i < n; ++i) {
            const double v = (*r.values)[i];
            const bool positive_only = std::string(r.name) == "icv";
            const bool ok = std::isfinite(v) && v >= r.lo && v <= r.hi && (!positive_only || v > 0.0);
            if (!ok) {
                flag("subject " + t.id[static_cast<std::size_t>(i)] + ": " + r.name + " = " + std::to_string(v) +
                     " outside the declared range");
            }
        }
    }
    if (static_cast<int>(t.label.size()) != n) throw DimensionError("label column has the wrong length");
    for (int i = 0; i < n; ++i) {
        const int l = t.label[static_cast<std::size_t>(i)];
        if (l != 0 && l != 1) flag("subject " + t.id[static_cast<std::size_t>(i)] + ": label must be 0 or 1");
    }
    return warnings;
}

CovariateTable load_covariates(const std::filesystem::path& path, bool strict, std::vector<std::string>* warnings) {
    const csv::Table raw = csv::read(path);
    const int c_id = csv::column(raw, "id", path);
    const int c_age = csv::column(raw, "age", path);
    const int c_bdi = csv::column(raw, "bdi", path);
    const int c_icv = csv::column(raw, "icv", path);
    const int c_pss = csv::column(raw, "pss", path);
    const int c_ctq = csv::column(raw, "ctqtot", path);
    const int c_label = csv::column(raw, "label", path);

    const auto n = static_cast<Eigen::Index>(raw.rows.size());
    CovariateTable t;
    t.age.resize(n);
    t.bdi.resize(n);
    t.icv.resize(n);
    t.pss.resize(n);
    t.ctqtot.resize(n);
    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
        const auto i = static_cast<Eigen::Index>(r);
        t.id.push_back(raw.rows[r][static_cast<std::size_t>(c_id)]);
        t.age[i] = csv::number(raw, r, c_age, path);
        t.bdi[i] = csv::number(raw, r, c_bdi, path);
        t.icv[i] = csv::number(raw, r, c_icv, path);
        t.pss[i] = csv::number(raw, r, c_pss, path);
        t.ctqtot[i] = csv::number(raw, r, c_ctq, path);
        const double l = csv::number(raw, r, c_label, path);
        t.label.push_back(static_cast<int>(std::lround(l)));
        if (static_cast<double>(t.label.back()) != l) {
            throw ParseError(path.string() + ":" + std::to_string(raw.line[r]) + ": field \"label\" must be 0 or 1");
        }
    }
    auto w = validate_covariates(t, strict);
    if (warnings) *warnings = std::move(w);
    return t;
}

void save_covariates(const CovariateTable& t, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "id,age,bdi,icv,pss,ctqtot,label\n";
    for (int i = 0; i < t.size(); ++i) {
        out << t.id[static_cast<std::size_t>(i)] << ',' << t.age[i] << ',' << t.bdi[i] << ',' << t.icv[i] << ','
            << t.pss[i] << ',' << t.ctqtot[i] << ',' << t.label[static_cast<std::size_t>(i)] << '\n';
    }
}

Eigen::MatrixXd load_score_table(const std::filesystem::path& path, const std::vector<std::string>& ids) {
    const csv::Table raw = csv::read(path);
    const int c_id = csv::column(raw, "id", path);
    std::vector<int> score_cols;
    for (int k = 1;; ++k) {
        const std::string name = "z" + std::to_string(k);
        auto it = std::find(raw.header.begin(), raw.header.end(), name);
        if (it == raw.header.end()) break;
        score_cols.push_back(static_cast<int>(it - raw.header.begin()));
    }
    if (score_cols.empty()) throw ParseError(path.string() + ": header has no score columns z1, z2, ...");

    std::map<std::string, std::size_t> row_of;
    for (std::size_t r = 0; r < raw.rows.size(); ++r) row_of[raw.rows[r][static_cast<std::size_t>(c_id)]] = r;

    Eigen::MatrixXd m(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(score_cols.size()));
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto it = row_of.find(ids[i]);
        if (it == row_of.end()) throw InputError(path.string() + ": no scores for subject '" + ids[i] + "'");
        for (std::size_t k = 0; k < score_cols.size(); ++k) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                csv::number(raw, it->second, score_cols[k], path);
        }
    }
    return m;
}

void save_score_table(const Eigen::MatrixXd& scores, const std::vector<std::string>& ids,
                      const std::filesystem::path& path) {
    if (static_cast<std::size_t>(scores.rows()) != ids.size()) throw DimensionError("score rows do not match ids");
    auto out = open_output(path);
    out << "id";
    for (Eigen::Index k = 0; k < scores.cols(); ++k) out << ",z" << k + 1;
    out << '\n';
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        out << ids[static_cast<std::size_t>(i)];
        for (Eigen::Index k = 0; k < scores.cols(); ++k) out << ',' << scores(i, k);
        out << '\n';
    }
}

void write_suite_csv(const std::vector<SuiteRow>& rows, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "model,response,design,r2,adj_r2,n_columns,term,coefficient,sign,p_value,significant\n";
    for (const SuiteRow& r : rows) {
        auto prefix = [&] {
            out << r.model << ',' << r.response << ',' << r.design << ',' << r.r2 << ',' << r.adj_r2 << ','
                << r.n_selected << ',';
        };
        if (r.terms.empty()) {
            prefix();
            out << ",,,,\n";
        }
        for (const TermReport& t : r.terms) {
            prefix();
            out << t.term << ',' << t.coefficient << ',' << (t.coefficient >= 0.0 ? '+' : '-') << ',' << t.p_value
                << ',' << (t.significant ? 1 : 0) << '\n';
        }
    }
}

void write_suite_json(const std::vector<SuiteRow>& rows, const std::filesystem::path& path) {
    nlohmann::json doc = nlohmann::json::array();
    for (const SuiteRow& r : rows) {
        nlohmann::json terms = nlohmann::json::array();
        for (const TermReport& t : r.terms) {
            terms.push_back({{"term", t.term},
                             {"coefficient", t.coefficient},
                             {"sign", t.coefficient >= 0.0 ? "+" : "-"},
                             {"p_value", t.p_value},
                             {"significant", t.significant}});
        }
        doc.push_back({{"model", r.model},
                       {"response", r.response},
                       {"design", r.design},
                       {"r2", r.r2},
                       {"adj_r2", r.adj_r2},
                       {"n_columns", r.n_selected},
                       {"terms", terms}});
    }
    auto out = open_output(path);
    out << doc.dump(2) << '\n';
}

} // namespace esa
