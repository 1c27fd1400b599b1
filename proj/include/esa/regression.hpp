#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace esa {

/// Per-subject clinical covariates and responses.
struct CovariateTable {
    std::vector<std::string> id;
    Eigen::VectorXd age;
    Eigen::VectorXd bdi;
    Eigen::VectorXd icv;
    Eigen::VectorXd pss;
    Eigen::VectorXd ctqtot;
    std::vector<int> label;

    int size() const noexcept { return static_cast<int>(id.size()); }
};

/// Checks the declared ranges (age >= 0, bdi 0-63, icv > 0, pss 0-42,
/// ctqtot 25-125, label 0/1). Strict mode throws InputError on the first
/// violation; lenient mode returns one warning per violation.
std::vector<std::string> validate_covariates(const CovariateTable& table, bool strict);

/// CSV with a header naming id, age, bdi, icv, pss, ctqtot, label (any order,
/// extra columns ignored).
CovariateTable load_covariates(const std::filesystem::path& path, bool strict = true,
                               std::vector<std::string>* warnings = nullptr);
void save_covariates(const CovariateTable& table, const std::filesystem::path& path);

/// Principal scores of each structure: matrix rows are subjects, columns are
/// components 1..k.
struct ScoreSet {
    std::vector<std::string> structures;
    std::vector<Eigen::MatrixXd> scores;
};

/// CSV with header id,z1,...,zk. Rows are reordered to match `ids`.
Eigen::MatrixXd load_score_table(const std::filesystem::path& path, const std::vector<std::string>& ids);
void save_score_table(const Eigen::MatrixXd& scores, const std::vector<std::string>& ids,
                      const std::filesystem::path& path);

enum class Response { Pss, Ctqtot };
const char* response_name(Response r);

enum class TermKind { Intercept, Age, Bdi, Icv, Ps, AgeByPs, BdiByPs };

struct Term {
    TermKind kind = TermKind::Intercept;
    int structure = 0; ///< index into ScoreSet::structures
    int component = 0; ///< 1-based principal score index

    /// Intercept and plain covariates are fixed model structure and never
    /// enter or leave during stepwise selection.
    bool forced() const noexcept { return kind != TermKind::Ps && kind != TermKind::AgeByPs && kind != TermKind::BdiByPs; }
    std::string name(const ScoreSet* scores = nullptr) const;
    friend bool operator==(const Term&, const Term&) = default;
};

struct ModelSpec {
    Response response = Response::Pss;
    std::vector<Term> terms;
    int n_ps = 15;
    int n_interact_ps = 5;
};

/// Throws ArgumentError on duplicate terms or interactions beyond n_interact_ps.
void validate_spec(const ModelSpec& spec);

/// One of the ten model designs (id 1..10) over `n_structures` score sets:
/// models 1-4 predict PSS and 5-8 CTQTOT from {age, bdi, PS, interactions},
/// {age, bdi, PS}, {age, bdi} and {PS}; models 9 and 10 add ICV to the full
/// design for PSS and CTQTOT.
ModelSpec table_model(int id, int n_structures, int n_ps = 15, int n_interact_ps = 5);

struct DesignMatrix {
    Eigen::MatrixXd x;
    std::vector<std::string> names;
};

/// Columns in spec order. Interactions are elementwise products of the raw
/// covariate and score columns; with `standardize` every non-intercept column
/// is centred and scaled to unit sample standard deviation afterwards.
DesignMatrix design_matrix(const ModelSpec& spec, const CovariateTable& cov, const ScoreSet& scores,
                           bool standardize = false);

Eigen::VectorXd response_vector(const CovariateTable& cov, Response r);

struct RegressionFit {
    std::vector<std::string> names;
    Eigen::VectorXd coefficients;
    Eigen::VectorXd std_errors;
    Eigen::VectorXd t_stats;
    Eigen::VectorXd p_values;
    Eigen::VectorXd residuals;
    double r2 = 0.0;
    double adj_r2 = 0.0;
    double rss = 0.0;
    double sigma2 = 0.0; ///< residual variance rss / (n - columns)
    int n = 0;
    int columns = 0;
    bool has_intercept = false;
    std::vector<std::string> selected; ///< terms kept by stepwise selection
};

/// 1 - (1 - r2)(n - 1)/(n - p - 1), p counting non-intercept columns.
double adjusted_r2(double r2, int n, int p);

/// Least squares through a column-pivoted QR. Throws RankDeficiencyError
/// naming the dependent columns, or NumericalError when rows < columns + 1.
RegressionFit ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                      const std::vector<std::string>& names = {});

enum class Criterion { Aic, Bic, PValue };

struct StepwiseOptions {
    Criterion criterion = Criterion::Aic;
    double alpha_in = 0.05;  ///< PValue criterion: entry threshold
    double alpha_out = 0.10; ///< PValue criterion: removal threshold
    bool standardize = false;
};

struct StepwiseResult {
    RegressionFit fit;
    std::vector<Term> terms;
    /// Criterion value after every accepted move, starting from the baseline
    /// (AIC or BIC; for PValue the AIC is recorded for reference).
    std::vector<double> criterion_trace;
    std::vector<std::string> moves;
};

/// Information criterion of a fit (AIC: n ln(rss/n) + 2k, BIC: k ln n).
double information_criterion(const RegressionFit& fit, Criterion c);

/// Bidirectional stepwise search starting from the forced terms of the spec.
/// Each step applies the single add-or-drop move that most improves the
/// criterion (ties resolved by term order); candidate moves that make the
/// design rank deficient are skipped.
StepwiseResult stepwise_bidirectional(const ModelSpec& full, const CovariateTable& cov, const ScoreSet& scores,
                                      const StepwiseOptions& opts = {});

struct TermReport {
    std::string term;
    double coefficient = 0.0;
    double p_value = 1.0;
    bool significant = false;
};

struct SuiteRow {
    int model = 0;
    std::string response;
    std::string design;
    double r2 = 0.0;
    double adj_r2 = 0.0;
    int n_selected = 0;
    std::vector<TermReport> terms;
};

struct SuiteOptions {
    StepwiseOptions stepwise;
    int n_ps = 15;
    int n_interact_ps = 5;
    double significance = 0.05;
};

/// Fits all ten designs with stepwise selection.
std::vector<SuiteRow> run_model_suite(const CovariateTable& cov, const ScoreSet& scores,
                                      const SuiteOptions& opts = {});

void write_suite_csv(const std::vector<SuiteRow>& rows, const std::filesystem::path& path);
void write_suite_json(const std::vector<SuiteRow>& rows, const std::filesystem::path& path);

} // namespace esa
