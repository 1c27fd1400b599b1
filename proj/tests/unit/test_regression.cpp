#include "doctest.h"

#include "support.hpp"

#include "esa/errors.hpp"
#include "esa/regression.hpp"
#include "esa/synthetic.hpp"
#include "esa/tdist.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>

using namespace esa;

namespace {

CovariateTable small_table(int n, std::uint64_t seed) {
    Rng rng(seed);
    CovariateTable t;
    t.age.resize(n);
    t.bdi.resize(n);
    t.icv.resize(n);
    t.pss.resize(n);
    t.ctqtot.resize(n);
    for (int i = 0; i < n; ++i) {
        t.id.push_back("p" + std::to_string(i));
        t.age[i] = rng.uniform(20, 60);
        t.bdi[i] = std::floor(rng.uniform(0, 40));
        t.icv[i] = rng.normal(1500, 100);
        t.pss[i] = std::floor(rng.uniform(0, 42));
        t.ctqtot[i] = std::floor(rng.uniform(25, 125));
        t.label.push_back(i % 2);
    }
    return t;
}

ScoreSet random_scores(int n, int k, int structures, std::uint64_t seed) {
    Rng rng(seed);
    ScoreSet s;
    for (int j = 0; j < structures; ++j) {
        s.structures.push_back("st" + std::to_string(j));
        Eigen::MatrixXd m(n, k);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
        s.scores.push_back(m);
    }
    return s;
}

bool has_ps_only(const StepwiseResult& r, const Term& want) {
    bool found = false;
    for (const Term& t : r.terms) {
        if (t.forced()) continue;
        if (t == want) found = true;
        else return false;
    }
    return found;
}

} // namespace

TEST_CASE("design matrix shapes and columns") {
    const CovariateTable cov = small_table(3, 1);
    const ScoreSet sc = random_scores(3, 15, 3, 2);
    ModelSpec spec;
    spec.terms = {{TermKind::Intercept}, {TermKind::Age}};
    const DesignMatrix d = design_matrix(spec, cov, sc);
    CHECK(d.x.rows() == 3);
    CHECK(d.x.cols() == 2);
    CHECK((d.x.col(0).array() == 1.0).all());
    CHECK(d.names == std::vector<std::string>{"(intercept)", "age"});

    const ModelSpec m1 = table_model(1, 3);
    CHECK(m1.terms.size() == 78);
    CHECK(table_model(2, 3).terms.size() == 48);
    CHECK(table_model(3, 3).terms.size() == 3);
    CHECK(table_model(4, 3).terms.size() == 46);
    CHECK(table_model(9, 3).terms.size() == 79);
    CHECK(table_model(5, 1).response == Response::Ctqtot);
    CHECK(table_model(10, 1).response == Response::Ctqtot);

    ModelSpec inter;
    inter.terms = {{TermKind::AgeByPs, 0, 1}};
    const DesignMatrix di = design_matrix(inter, cov, sc);
    CHECK((di.x.col(0).array() == (cov.age.array() * sc.scores[0].col(0).array())).all());

    ModelSpec std_spec;
    std_spec.terms = {{TermKind::Intercept}, {TermKind::Age}, {TermKind::Ps, 1, 2}};
    const DesignMatrix ds = design_matrix(std_spec, small_table(30, 3), random_scores(30, 15, 2, 4), true);
    for (int c = 1; c < 3; ++c) {
        CHECK(std::abs(ds.x.col(c).mean()) < 1e-12);
        const double var = (ds.x.col(c).array() - ds.x.col(c).mean()).square().sum() / 29.0;
        CHECK(var == doctest::Approx(1.0));
    }
}

TEST_CASE("model specs reject duplicates, bad indices and mismatched rows") {
    ModelSpec dup;
    dup.terms = {{TermKind::Age}, {TermKind::Age}};
    CHECK_THROWS_AS(validate_spec(dup), ArgumentError);
    ModelSpec far;
    far.terms = {{TermKind::AgeByPs, 0, 6}};
    CHECK_THROWS_AS(validate_spec(far), ArgumentError);
    CHECK_THROWS_AS(table_model(11, 1), ArgumentError);

    ModelSpec ok;
    ok.terms = {{TermKind::Ps, 2, 1}};
    CHECK_THROWS_AS(design_matrix(ok, small_table(5, 1), random_scores(5, 15, 1, 1)), DimensionError);
    ok.terms = {{TermKind::Ps, 0, 1}};
    CHECK_THROWS_AS(design_matrix(ok, small_table(5, 1), random_scores(6, 15, 1, 1)), DimensionError);
    ok.terms = {{TermKind::Ps, 0, 15}};
    CHECK_THROWS_AS(design_matrix(ok, small_table(5, 1), random_scores(5, 10, 1, 1)), DimensionError);
}

TEST_CASE("OLS on exact data") {
    Rng rng(3);
    Eigen::MatrixXd x(20, 3);
    x.col(0).setOnes();
    for (int i = 0; i < 20; ++i) x(i, 1) = rng.normal(), x(i, 2) = rng.normal();
    const Eigen::VectorXd y = x * Eigen::Vector3d(1.0, -2.0, 0.5);
    const RegressionFit f = ols_fit(x, y);
    CHECK(f.r2 == doctest::Approx(1.0));
    CHECK(f.residuals.cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(f.has_intercept);
    CHECK(f.names[1] == "x1");
}

TEST_CASE("OLS coefficient coverage on y = 2 + 3x") {
    int covered = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        Eigen::MatrixXd x(50, 2);
        Eigen::VectorXd y(50);
        for (int i = 0; i < 50; ++i) {
            x(i, 0) = 1.0;
            x(i, 1) = rng.uniform(-1, 1);
            y[i] = 2 + 3 * x(i, 1) + rng.normal(0, 0.1);
        }
        const RegressionFit f = ols_fit(x, y);
        covered += std::abs(f.coefficients[0] - 2) <= 3 * f.std_errors[0] && std::abs(f.coefficients[1] - 3) <= 3 * f.std_errors[1];
        CHECK((x.transpose() * f.residuals).cwiseAbs().maxCoeff() <= 1e-8 * y.norm());
        for (Eigen::Index k = 0; k < f.p_values.size(); ++k) CHECK((f.p_values[k] >= 0.0 && f.p_values[k] <= 1.0));
        CHECK(f.adj_r2 <= f.r2);
    }
    CHECK(covered >= 19);
}

TEST_CASE("inference matches an independent normal-equation computation") {
    Rng rng(5);
    const int n = 40;
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        x.row(i) << 1.0, rng.normal(), rng.normal();
        y[i] = 0.3 + 0.2 * x(i, 1) + rng.normal();
    }
    const RegressionFit f = ols_fit(x, y);
    const Eigen::MatrixXd xtx_inv = (x.transpose() * x).inverse();
    const Eigen::VectorXd beta = xtx_inv * x.transpose() * y;
    const double s2 = (y - x * beta).squaredNorm() / (n - 3);
    for (int k = 0; k < 3; ++k) {
        CHECK(f.coefficients[k] == doctest::Approx(beta[k]).epsilon(1e-10));
        const double se = std::sqrt(s2 * xtx_inv(k, k));
        CHECK(f.std_errors[k] == doctest::Approx(se).epsilon(1e-10));
        CHECK(f.p_values[k] == doctest::Approx(student_t_two_sided_p(beta[k] / se, n - 3)).epsilon(1e-9));
    }
}

TEST_CASE("adjusted R2 matches the formula on random instances") {
    Rng rng(7);
    for (int t = 0; t < 10; ++t) {
        const int n = 20 + static_cast<int>(rng.bits() % 30);
        const int p = 1 + static_cast<int>(rng.bits() % 5);
        Eigen::MatrixXd x(n, p + 1);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            x(i, 0) = 1;
            for (int c = 1; c <= p; ++c) x(i, c) = rng.normal();
            y[i] = rng.normal() + x(i, 1);
        }
        const RegressionFit f = ols_fit(x, y);
        const double tss = (y.array() - y.mean()).square().sum();
        const double r2 = 1.0 - f.residuals.squaredNorm() / tss;
        CHECK(std::abs(f.r2 - r2) <= 1e-12);
        CHECK(std::abs(f.adj_r2 - (1.0 - (1.0 - f.r2) * (n - 1.0) / (n - p - 1.0))) <= 1e-12);
        CHECK(std::abs(adjusted_r2(f.r2, n, p) - f.adj_r2) <= 1e-15);
    }
}

TEST_CASE("adding a column never lowers R2") {
    Rng rng(8);
    for (int t = 0; t < 10; ++t) {
        Eigen::MatrixXd x(30, 5);
        Eigen::VectorXd y(30);
        for (int i = 0; i < 30; ++i) {
            x(i, 0) = 1;
            for (int c = 1; c < 5; ++c) x(i, c) = rng.normal();
            y[i] = rng.normal();
        }
        double prev = -1;
        for (int c = 1; c <= 5; ++c) {
            const double r2 = ols_fit(x.leftCols(c), y).r2;
            CHECK(r2 >= prev - 1e-12);
            prev = r2;
        }
    }
}

TEST_CASE("OLS error reporting") {
    Eigen::MatrixXd x(10, 3);
    Rng rng(1);
    for (int i = 0; i < 10; ++i) x.row(i) << 1, rng.normal(), 0;
    x.col(2) = 2.0 * x.col(1);
    const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(10, 0, 1);
    try {
        ols_fit(x, y, {"(intercept)", "a", "b"});
        FAIL("expected a rank error");
    } catch (const RankDeficiencyError& e) {
        const std::string msg = e.what();
        CHECK((msg.find("a") != std::string::npos || msg.find("b") != std::string::npos));
    }
    CHECK_THROWS_AS(ols_fit(Eigen::MatrixXd::Ones(3, 3), Eigen::VectorXd::Ones(3)), NumericalError);
}

TEST_CASE("null p-values reject at the nominal rate") {
    int rejections = 0;
    const int n = 80, reps = 500;
    for (int r = 0; r < reps; ++r) {
        Rng rng = Rng::stream(77, static_cast<std::uint64_t>(r));
        Eigen::MatrixXd x(n, 4);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            x.row(i) << 1.0, rng.uniform(18, 65), rng.uniform(0, 40), rng.normal();
            y[i] = 10 + 0.1 * x(i, 1) + 0.2 * x(i, 2) + rng.normal(0, 3);
        }
        rejections += ols_fit(x, y).p_values[3] < 0.05;
    }
    const double rate = static_cast<double>(rejections) / reps;
    MESSAGE("null rejection rate " << rate);
    CHECK(rate >= 0.02);
    CHECK(rate <= 0.09);
}

TEST_CASE("stepwise keeps forced terms and improves the criterion at every move") {
    CohortSpec cs;
    cs.n_subjects = 120;
    cs.build_surfaces = false;
    cs.age_coef = 0.1;
    cs.terms = {{{TermKind::Ps, 0, 2}, 30.0}};
    cs.seed = 4;
    const RegressionCohort c = gen_regression_cohort(cs);
    for (Criterion crit : {Criterion::Aic, Criterion::Bic}) {
        StepwiseOptions o;
        o.criterion = crit;
        const StepwiseResult r = stepwise_bidirectional(table_model(1, 1), c.covariates, c.scores, o);
        for (std::size_t k = 1; k < r.criterion_trace.size(); ++k) CHECK(r.criterion_trace[k] < r.criterion_trace[k - 1]);
        CHECK(r.criterion_trace.size() == r.moves.size() + 1);
        for (TermKind f : {TermKind::Intercept, TermKind::Age, TermKind::Bdi}) {
            CHECK(std::count_if(r.terms.begin(), r.terms.end(), [&](const Term& t) { return t.kind == f; }) == 1);
        }
        CHECK(std::find(r.terms.begin(), r.terms.end(), Term{TermKind::Ps, 0, 2}) != r.terms.end());
        CHECK(information_criterion(r.fit, crit) == doctest::Approx(r.criterion_trace.back()));
        const StepwiseResult again = stepwise_bidirectional(table_model(1, 1), c.covariates, c.scores, o);
        CHECK(again.terms == r.terms);
    }
    const StepwiseResult m9 = stepwise_bidirectional(table_model(9, 1), c.covariates, c.scores);
    CHECK(std::find(m9.terms.begin(), m9.terms.end(), Term{TermKind::Icv}) != m9.terms.end());
}

TEST_CASE("information criteria follow their definitions") {
    Rng rng(2);
    Eigen::MatrixXd x(25, 3);
    Eigen::VectorXd y(25);
    for (int i = 0; i < 25; ++i) {
        x.row(i) << 1.0, rng.normal(), rng.normal();
        y[i] = rng.normal();
    }
    const RegressionFit f = ols_fit(x, y);
    CHECK(information_criterion(f, Criterion::Aic) == doctest::Approx(25 * std::log(f.rss / 25) + 2 * 3));
    CHECK(information_criterion(f, Criterion::Bic) == doctest::Approx(25 * std::log(f.rss / 25) + 3 * std::log(25.0)));
}

TEST_CASE("planted single-score support is recovered") {
    int hits = 0;
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
        CohortSpec cs;
        cs.n_subjects = 200;
        cs.build_surfaces = false;
        cs.age_coef = 0.05;
        cs.bdi_coef = 0.1;
        cs.terms = {{{TermKind::Ps, 0, 2}, 25.0}};
        cs.snr = 5.0;
        cs.seed = 1000 + rep;
        const RegressionCohort c = gen_regression_cohort(cs);
        StepwiseOptions o;
        o.criterion = Criterion::PValue;
        o.alpha_in = 0.001;
        o.alpha_out = 0.002;
        hits += has_ps_only(stepwise_bidirectional(table_model(2, 1), c.covariates, c.scores, o), {TermKind::Ps, 0, 2});
    }
    CHECK(hits >= 18);
}

TEST_CASE("pure-noise responses keep only the forced terms most of the time") {
    int baseline_only = 0;
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
        CohortSpec cs;
        cs.n_subjects = 150;
        cs.build_surfaces = false;
        cs.noise_sd = 4.0;
        cs.seed = 500 + rep;
        const RegressionCohort c = gen_regression_cohort(cs);
        StepwiseOptions o;
        o.criterion = Criterion::Bic;
        const StepwiseResult r = stepwise_bidirectional(table_model(2, 1), c.covariates, c.scores, o);
        baseline_only += std::all_of(r.terms.begin(), r.terms.end(), [](const Term& t) { return t.forced(); });
    }
    CHECK(baseline_only > 10);
}

TEST_CASE("model suite on null-shape and interaction cohorts") {
    SuiteOptions so;
    so.stepwise.criterion = Criterion::Bic;

    CohortSpec nul;
    nul.n_subjects = 200;
    nul.build_surfaces = false;
    nul.age_coef = 0.15;
    nul.bdi_coef = 0.4;
    nul.noise_sd = 2.0;
    nul.seed = 31;
    const RegressionCohort a = gen_regression_cohort(nul);
    const auto rows = run_model_suite(a.covariates, a.scores, so);
    REQUIRE(rows.size() == 10);
    for (int i = 0; i < 10; ++i) CHECK(rows[static_cast<std::size_t>(i)].model == i + 1);
    CHECK(rows[1].adj_r2 - rows[2].adj_r2 <= 0.05);
    CHECK(rows[2].adj_r2 > 0.3);

    CohortSpec inter = nul;
    inter.seed = 32;
    inter.age_coef = 0.05;
    inter.bdi_coef = 0.1;
    inter.noise_sd = 1.0;
    inter.terms = {{{TermKind::AgeByPs, 0, 1}, 4.0}, {{TermKind::Ps, 0, 1}, -160.0}};
    const RegressionCohort b = gen_regression_cohort(inter);
    const auto rb = run_model_suite(b.covariates, b.scores, so);
    MESSAGE("model 1 adj R2 " << rb[0].adj_r2 << ", model 2 adj R2 " << rb[1].adj_r2);
    CHECK(rb[0].adj_r2 - rb[1].adj_r2 >= 0.1);
}

TEST_CASE("suite reports serialise every row") {
    const CovariateTable cov = small_table(60, 9);
    const ScoreSet sc = random_scores(60, 15, 1, 10);
    const auto rows = run_model_suite(cov, sc);
    const auto dir = test::scratch_dir("suite");
    write_suite_csv(rows, dir / "suite.csv");
    write_suite_json(rows, dir / "suite.json");
    std::ifstream in(dir / "suite.json");
    const auto j = nlohmann::json::parse(in);
    REQUIRE(j.is_array());
    CHECK(j.size() == 10);
    std::ifstream csv(dir / "suite.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "model,response,design,r2,adj_r2,n_columns,term,coefficient,sign,p_value,significant");
}

TEST_CASE("covariate ingestion") {
    const auto dir = test::scratch_dir("cov");
    const CovariateTable t = small_table(6, 2);
    save_covariates(t, dir / "c.csv");
    const CovariateTable r = load_covariates(dir / "c.csv");
    CHECK(r.id == t.id);
    CHECK((r.age.array() == t.age.array()).all());
    CHECK((r.icv.array() == t.icv.array()).all());
    CHECK(r.label == t.label);

    {
        std::ofstream f(dir / "reordered.csv");
        f << "label,extra,ctqtot,pss,icv,bdi,age,id\n1,x,30,10,1400,5,33,a\n0,y,40,12,1500,7,44,b\n";
    }
    const CovariateTable o = load_covariates(dir / "reordered.csv");
    CHECK(o.id == std::vector<std::string>{"a", "b"});
    CHECK(o.age[1] == 44.0);

    {
        std::ofstream f(dir / "range.csv");
        f << "id,age,bdi,icv,pss,ctqtot,label\na,30,70,1400,10,30,1\n";
    }
    CHECK_THROWS_AS(load_covariates(dir / "range.csv"), InputError);
    std::vector<std::string> warnings;
    CHECK_NOTHROW(load_covariates(dir / "range.csv", false, &warnings));
    CHECK(warnings.size() == 1);

    {
        std::ofstream f(dir / "short.csv");
        f << "id,age,bdi,icv,pss,ctqtot,label\na,30,10,1400\n";
    }
    CHECK_THROWS_AS(load_covariates(dir / "short.csv"), ParseError);
    {
        std::ofstream f(dir / "text.csv");
        f << "id,age,bdi,icv,pss,ctqtot,label\na,old,10,1400,10,30,1\n";
    }
    CHECK_THROWS_AS(load_covariates(dir / "text.csv"), ParseError);
    {
        std::ofstream f(dir / "nocol.csv");
        f << "id,age,bdi,icv,pss,label\na,30,10,1400,10,1\n";
    }
    CHECK_THROWS_AS(load_covariates(dir / "nocol.csv"), ParseError);
    CHECK_THROWS_AS(load_covariates(dir / "absent.csv"), InputError);
}

TEST_CASE("score tables round trip and reorder by id") {
    const auto dir = test::scratch_dir("scores");
    Eigen::MatrixXd s(3, 2);
    s << 1, 2, 3, 4, 5, 6;
    save_score_table(s, {"a", "b", "c"}, dir / "s.csv");
    const Eigen::MatrixXd r = load_score_table(dir / "s.csv", {"c", "a", "b"});
    CHECK(r.row(0) == s.row(2));
    CHECK(r.row(1) == s.row(0));
    CHECK_THROWS_AS(load_score_table(dir / "s.csv", {"a", "z"}), InputError);
}
