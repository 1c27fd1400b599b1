#include "esa/regression.hpp"

#include "esa/errors.hpp"
#include "esa/parallel.hpp"
#include "esa/tdist.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace esa {
namespace {

const char* design_label(int id) {
    switch (id) {
    case 1: case 5: return "age + bdi + ps + interactions";
    case 2: case 6: return "age + bdi + ps";
    case 3: case 7: return "age + bdi";
    case 4: case 8: return "ps";
    default: return "age + bdi + icv + ps + interactions";
    }
}

bool is_intercept_column(const Eigen::VectorXd& c) {
    return c.size() > 0 && (c.array() == 1.0).all();
}

} // namespace

const char* response_name(Response r) { return r == Response::Pss ? "PSS" : "CTQTOT"; }

std::string Term::name(const ScoreSet* scores) const {
    auto ps = [&] {
        const std::string s = scores && structure < static_cast<int>(scores->structures.size())
                                  ? scores->structures[static_cast<std::size_t>(structure)]
                                  : "s" + std::to_string(structure);
        return s + ".ps" + std::to_string(component);
    };
    switch (kind) {
    case TermKind::Intercept: return "(intercept)";
    case TermKind::Age: return "age";
    case TermKind::Bdi: return "bdi";
    case TermKind::Icv: return "icv";
    case TermKind::Ps: return ps();
    case TermKind::AgeByPs: return "age:" + ps();
    case TermKind::BdiByPs: return "bdi:" + ps();
    }
    return "?";
}

void validate_spec(const ModelSpec& spec) {
    for (std::size_t i = 0; i < spec.terms.size(); ++i) {
        const Term& t = spec.terms[i];
        for (std::size_t j = 0; j < i; ++j) {
            if (spec.terms[j] == t) throw ArgumentError("duplicate model term " + t.name());
        }
        if (t.kind == TermKind::Ps && (t.component < 1 || t.component > spec.n_ps)) {
            throw ArgumentError("term " + t.name() + " exceeds n_ps = " + std::to_string(spec.n_ps));
        }
        if ((t.kind == TermKind::AgeByPs || t.kind == TermKind::BdiByPs) &&
            (t.component < 1 || t.component > spec.n_interact_ps)) {
            throw ArgumentError("interaction " + t.name() + " exceeds n_interact_ps = " +
                                std::to_string(spec.n_interact_ps));
        }
    }
}

ModelSpec table_model(int id, int n_structures, int n_ps, int n_interact_ps) {
    if (id < 1 || id > 10) throw ArgumentError("model id must be in 1..10");
    if (n_structures < 1) throw ArgumentError("model needs at least one score set");
    const int design = id >= 9 ? 0 : (id - 1) % 4 + 1; // 0 marks the ICV-controlled full design
    ModelSpec spec;
    spec.response = (id <= 4 || id == 9) ? Response::Pss : Response::Ctqtot;
    spec.n_ps = n_ps;
    spec.n_interact_ps = n_interact_ps;

    const bool covariates = design != 4;
    const bool shape = design != 3;
    const bool interactions = design == 1 || design == 0;
    spec.terms.push_back({TermKind::Intercept});
    if (covariates) {
        spec.terms.push_back({TermKind::Age});
        spec.terms.push_back({TermKind::Bdi});
    }
    if (design == 0) spec.terms.push_back({TermKind::Icv});
    if (shape) {
        for (int s = 0; s < n_structures; ++s) {
            for (int k = 1; k <= n_ps; ++k) spec.terms.push_back({TermKind::Ps, s, k});
        }
    }
    if (interactions) {
        for (TermKind kind : {TermKind::AgeByPs, TermKind::BdiByPs}) {
            for (int s = 0; s < n_structures; ++s) {
                for (int k = 1; k <= n_interact_ps; ++k) spec.terms.push_back({kind, s, k});
            }
        }
    }
    return spec;
}

Eigen::VectorXd response_vector(const CovariateTable& cov, Response r) {
    return r == Response::Pss ? cov.pss : cov.ctqtot;
}

DesignMatrix design_matrix(const ModelSpec& spec, const CovariateTable& cov, const ScoreSet& scores,
                           bool standardize) {
    validate_spec(spec);
    const int n = cov.size();
    auto score_column = [&](const Term& t) -> Eigen::VectorXd {
        if (t.structure < 0 || t.structure >= static_cast<int>(scores.scores.size())) {
            throw DimensionError("term " + t.name(&scores) + " refers to a missing score set");
        }
        const Eigen::MatrixXd& m = scores.scores[static_cast<std::size_t>(t.structure)];
        if (m.rows() != n) {
            throw DimensionError("score set " + std::to_string(t.structure) + " has " + std::to_string(m.rows()) +
                                 " rows, covariates have " + std::to_string(n));
        }
        if (t.component > m.cols()) {
            throw DimensionError("term " + t.name(&scores) + " needs " + std::to_string(t.component) +
                                 " scores, only " + std::to_string(m.cols()) + " available");
        }
        return m.col(t.component - 1);
    };

    DesignMatrix d{Eigen::MatrixXd(n, static_cast<Eigen::Index>(spec.terms.size())), {}};
    for (std::size_t c = 0; c < spec.terms.size(); ++c) {
        const Term& t = spec.terms[c];
        Eigen::VectorXd col;
        switch (t.kind) {
        case TermKind::Intercept: col = Eigen::VectorXd::Ones(n); break;
        case TermKind::Age: col = cov.age; break;
        case TermKind::Bdi: col = cov.bdi; break;
        case TermKind::Icv: col = cov.icv; break;
        case TermKind::Ps: col = score_column(t); break;
        case TermKind::AgeByPs: col = cov.age.cwiseProduct(score_column(t)); break;
        case TermKind::BdiByPs: col = cov.bdi.cwiseProduct(score_column(t)); break;
        }
        if (col.size() != n) throw DimensionError("covariate column " + t.name() + " has the wrong length");
        if (standardize && t.kind != TermKind::Intercept && n > 1) {
            const double mean = col.mean();
            const double sd = std::sqrt((col.array() - mean).square().sum() / (n - 1));
            col = (col.array() - mean) / (sd > 0.0 ? sd : 1.0);
        }
        d.x.col(static_cast<Eigen::Index>(c)) = col;
        d.names.push_back(t.name(&scores));
    }
    return d;
}

double adjusted_r2(double r2, int n, int p) {
    return 1.0 - (1.0 - r2) * (n - 1.0) / (n - p - 1.0);
}

RegressionFit ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& names) {
    const auto n = static_cast<int>(x.rows());
    const auto p = static_cast<int>(x.cols());
    if (y.size() != n) throw DimensionError("response length does not match the design rows");
    if (n < p + 1) {
        throw NumericalError("underdetermined regression: " + std::to_string(n) + " rows for " +
                             std::to_string(p) + " columns");
    }
    auto column_name = [&](int j) {
        return j < static_cast<int>(names.size()) ? names[static_cast<std::size_t>(j)] : "x" + std::to_string(j);
    };

    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < p) {
        std::vector<std::string> dependent;
        for (int j = static_cast<int>(qr.rank()); j < p; ++j) {
            dependent.push_back(column_name(static_cast<int>(qr.colsPermutation().indices()[j])));
        }
        std::string list;
        for (const auto& s : dependent) list += (list.empty() ? "" : ", ") + s;
        throw RankDeficiencyError("design is rank deficient; collinear columns: " + list, dependent);
    }

    RegressionFit fit;
    fit.n = n;
    fit.columns = p;
    for (int j = 0; j < p; ++j) fit.names.push_back(column_name(j));
    fit.coefficients = qr.solve(y);
    fit.residuals = y - x * fit.coefficients;
    fit.rss = fit.residuals.squaredNorm();

    fit.has_intercept = false;
    for (int j = 0; j < p; ++j) fit.has_intercept = fit.has_intercept || is_intercept_column(x.col(j));
    const double tss = fit.has_intercept ? (y.array() - y.mean()).square().sum() : y.squaredNorm();
    fit.r2 = tss > 0.0 ? 1.0 - fit.rss / tss : 1.0;
    const int predictors = p - (fit.has_intercept ? 1 : 0);
    fit.adj_r2 = adjusted_r2(fit.r2, n, predictors);

    const int dof = n - p;
    fit.sigma2 = fit.rss / dof;
    // (X^T X)^-1 = P R^-1 R^-T P^T
    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::VectorXd perm_var = (r_inv * r_inv.transpose()).diagonal();
    fit.std_errors.resize(p);
    fit.t_stats.resize(p);
    fit.p_values.resize(p);
    const auto& perm = qr.colsPermutation().indices();
    for (int k = 0; k < p; ++k) fit.std_errors[perm[k]] = std::sqrt(fit.sigma2 * perm_var[k]);
    for (int j = 0; j < p; ++j) {
        const double se = fit.std_errors[j];
        fit.t_stats[j] = se > 0.0 ? fit.coefficients[j] / se
                                  : (fit.coefficients[j] == 0.0 ? 0.0 : std::copysign(INFINITY, fit.coefficients[j]));
        fit.p_values[j] = student_t_two_sided_p(fit.t_stats[j], dof);
    }
    return fit;
}

double information_criterion(const RegressionFit& fit, Criterion c) {
    const double n = fit.n;
    const double rss = std::max(fit.rss, std::numeric_limits<double>::min());
    const double fitv = n * std::log(rss / n);
    const double k = fit.columns;
    return c == Criterion::Bic ? fitv + k * std::log(n) : fitv + 2.0 * k;
}

StepwiseResult stepwise_bidirectional(const ModelSpec& full, const CovariateTable& cov, const ScoreSet& scores,
                                      const StepwiseOptions& opts) {
    validate_spec(full);
    const DesignMatrix all = design_matrix(full, cov, scores, opts.standardize);
    const Eigen::VectorXd y = response_vector(cov, full.response);
    const int m = static_cast<int>(full.terms.size());

    std::vector<char> active(static_cast<std::size_t>(m), 0);
    for (int j = 0; j < m; ++j) active[static_cast<std::size_t>(j)] = full.terms[static_cast<std::size_t>(j)].forced();

    auto fit_set = [&](const std::vector<char>& set) -> std::optional<RegressionFit> {
        std::vector<int> cols;
        for (int j = 0; j < m; ++j) {
            if (set[static_cast<std::size_t>(j)]) cols.push_back(j);
        }
        Eigen::MatrixXd x(all.x.rows(), static_cast<Eigen::Index>(cols.size()));
        std::vector<std::string> names;
        for (std::size_t c = 0; c < cols.size(); ++c) {
            x.col(static_cast<Eigen::Index>(c)) = all.x.col(cols[c]);
            names.push_back(all.names[static_cast<std::size_t>(cols[c])]);
        }
        try {
            return ols_fit(x, y, names);
        } catch (const NumericalError&) {
            return std::nullopt;
        }
    };
    auto p_of = [&](const RegressionFit& f, int term) {
        const std::string& name = all.names[static_cast<std::size_t>(term)];
        const auto it = std::find(f.names.begin(), f.names.end(), name);
        return f.p_values[it - f.names.begin()];
    };

    std::optional<RegressionFit> current = fit_set(active);
    if (!current) throw NumericalError("stepwise baseline model cannot be fitted");
    const Criterion trace_criterion = opts.criterion == Criterion::PValue ? Criterion::Aic : opts.criterion;
    StepwiseResult out{*current, {}, {information_criterion(*current, trace_criterion)}, {}};

    const int max_moves = 4 * m + 10;
    for (int move = 0; move < max_moves; ++move) {
        int best_term = -1;
        std::optional<RegressionFit> best_fit;

        if (opts.criterion == Criterion::PValue) {
            // Removal first: the least significant selected term above alpha_out.
            double worst = opts.alpha_out;
            for (int j = 0; j < m; ++j) {
                if (!active[static_cast<std::size_t>(j)] || full.terms[static_cast<std::size_t>(j)].forced()) continue;
                const double pv = p_of(*current, j);
                if (pv > worst) {
                    worst = pv;
                    best_term = j;
                }
            }
            if (best_term >= 0) {
                auto set = active;
                set[static_cast<std::size_t>(best_term)] = 0;
                best_fit = fit_set(set);
            } else {
                double best_p = opts.alpha_in;
                for (int j = 0; j < m; ++j) {
                    if (active[static_cast<std::size_t>(j)]) continue;
                    auto set = active;
                    set[static_cast<std::size_t>(j)] = 1;
                    auto f = fit_set(set);
                    if (!f) continue;
                    const double pv = p_of(*f, j);
                    if (pv < best_p) {
                        best_p = pv;
                        best_term = j;
                        best_fit = std::move(f);
                    }
                }
            }
            if (best_term < 0 || !best_fit) break;
        } else {
            double best_value = information_criterion(*current, opts.criterion);
            for (int j = 0; j < m; ++j) {
                if (full.terms[static_cast<std::size_t>(j)].forced()) continue;
                auto set = active;
                set[static_cast<std::size_t>(j)] = active[static_cast<std::size_t>(j)] ? 0 : 1;
                auto f = fit_set(set);
                if (!f) continue;
                const double v = information_criterion(*f, opts.criterion);
                if (v < best_value) {
                    best_value = v;
                    best_term = j;
                    best_fit = std::move(f);
                }
            }
            if (best_term < 0) break;
        }

        const bool adding = !active[static_cast<std::size_t>(best_term)];
        active[static_cast<std::size_t>(best_term)] = adding ? 1 : 0;
        current = std::move(best_fit);
        out.moves.push_back((adding ? "+" : "-") + all.names[static_cast<std::size_t>(best_term)]);
        out.criterion_trace.push_back(information_criterion(*current, trace_criterion));
    }

    for (int j = 0; j < m; ++j) {
        if (active[static_cast<std::size_t>(j)]) out.terms.push_back(full.terms[static_cast<std::size_t>(j)]);
    }
    out.fit = std::move(*current);
    out.fit.selected = out.fit.names;
    return out;
}

std::vector<SuiteRow> run_model_suite(const CovariateTable& cov, const ScoreSet& scores, const SuiteOptions& opts) {
    const int n_structures = static_cast<int>(scores.scores.size());
    std::vector<SuiteRow> rows(10);
    parallel_for(10, [&](long i) {
        const int id = static_cast<int>(i) + 1;
        const ModelSpec spec = table_model(id, n_structures, opts.n_ps, opts.n_interact_ps);
        const StepwiseResult res = stepwise_bidirectional(spec, cov, scores, opts.stepwise);
        SuiteRow& row = rows[static_cast<std::size_t>(id - 1)];
        row.model = id;
        row.response = response_name(spec.response);
        row.design = design_label(id);
        row.r2 = res.fit.r2;
        row.adj_r2 = res.fit.adj_r2;
        row.n_selected = res.fit.columns;
        for (int j = 0; j < res.fit.columns; ++j) {
            if (res.terms[static_cast<std::size_t>(j)].kind == TermKind::Intercept) continue;
            const double pv = res.fit.p_values[j];
            row.terms.push_back({res.fit.names[static_cast<std::size_t>(j)], res.fit.coefficients[j], pv,
                                 pv < opts.significance});
        }
    });
    return rows;
}

} // namespace esa
