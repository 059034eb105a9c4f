#include <doctest.h>

#include "elsaa/config.hpp"
#include "elsaa/error.hpp"
#include "elsaa/harness.hpp"
#include "elsaa/stats.hpp"
#include "testing.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

using namespace elsaa;

namespace {

ExperimentConfig small_value_config() {
    ExperimentConfig c = default_experiment_config(ProblemKind::quadratic, ExperimentKind::value);
    c.sample_sizes = {10, 30};
    c.replications = 12;
    c.seed = 21;
    return c;
}

std::size_t line_count(const std::string& text) {
    std::size_t lines = 0;
    for (char ch : text) lines += ch == '\n' ? 1 : 0;
    return lines;
}

} // namespace

TEST_SUITE("harness") {

TEST_CASE("analytic truths") {
    const auto quad = true_value_oracle(default_problem_spec(ProblemKind::quadratic), 10'000, RandomSource(1));
    CHECK(quad.analytic);
    CHECK(quad.value == 1.0);
    CHECK(quad.standard_error == 0.0);

    // phi(z_0.9) / 0.1 with z_0.9 = 1.2815515655446004.
    const double z = 1.2815515655446004;
    const double expected = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi) / 0.1;
    const auto cvar = true_value_oracle(default_problem_spec(ProblemKind::cvar), 10'000, RandomSource(1));
    CHECK(cvar.analytic);
    CHECK(near(cvar.value, expected, 1e-9));
    CHECK(near(cvar.value, 1.755, 1e-3));

    // Gap of x_hat = 0.62 under N(0, 1): (0.62)^2.
    const auto gap = true_gap_oracle(default_problem_spec(ProblemKind::quadratic), std::vector<double>{0.62}, 10'000,
                                     RandomSource(1));
    CHECK(near(gap.value, 0.3844, 1e-12));
}

TEST_CASE("simulated truths agree with the analytic ones") {
    const auto spec = default_problem_spec(ProblemKind::cvar);
    const auto mc = true_value_oracle(spec, 400'000, RandomSource(2), OracleMode::monte_carlo);
    CHECK_FALSE(mc.analytic);
    CHECK(mc.standard_error > 0.0);
    CHECK(std::abs(mc.value - 1.754983) <= 5.0 * mc.standard_error);
    const auto quad =
        true_value_oracle(default_problem_spec(ProblemKind::quadratic), 400'000, RandomSource(3), OracleMode::monte_carlo);
    CHECK(std::abs(quad.value - 1.0) <= 5.0 * quad.standard_error);
    CHECK_THROWS_AS(true_value_oracle(spec, 9'999, RandomSource(2), OracleMode::monte_carlo), std::invalid_argument);
}

TEST_CASE("portfolio truth") {
    const auto spec = default_problem_spec(ProblemKind::portfolio);
    const auto x = portfolio_normal_optimum(spec);
    REQUIRE(x.size() == 2);
    CHECK(near(x[0], 0.5, 1e-6));
    CHECK(near(x[1], 0.5, 1e-6));
    const auto truth = true_value_oracle(spec, 1'000'000, RandomSource(4));
    CHECK_FALSE(truth.analytic);
    CHECK(near(truth.value, 0.96, 0.02));
    // Normal theory: -mu'x + phi(z_0.9)/0.1 * sqrt(x' Sigma x) = -1 + 1.754983 * sqrt(1.25).
    CHECK(near(portfolio_normal_value(spec, x), -1.0 + 1.7549833193248685 * std::sqrt(1.25), 1e-9));
    CHECK(std::abs(truth.value - portfolio_normal_value(spec, x)) <= 5.0 * truth.standard_error);
    auto infeasible = spec;
    infeasible.r_b = 5.0;
    CHECK_THROWS_AS(portfolio_normal_optimum(infeasible), SolverError);
}

TEST_CASE("single replication gives zero or full coverage") {
    ExperimentConfig c = small_value_config();
    c.replications = 1;
    const auto report = run_coverage_experiment(c);
    REQUIRE(report.cells.size() == c.sample_sizes.size() * c.methods.size());
    for (const auto& cell : report.cells) {
        if (cell.failures == 0) CHECK((cell.coverage == 0.0 || cell.coverage == 1.0));
        CHECK(cell.sd_width == 0.0);
    }
}

TEST_CASE("reports are deterministic and independent of the thread count") {
    ExperimentConfig c = small_value_config();
    const auto a = run_coverage_experiment(c);
    const auto b = run_coverage_experiment(c);
    c.jobs = 4;
    const auto d = run_coverage_experiment(c);
    CHECK(emit_report(a, ReportFormat::csv) == emit_report(b, ReportFormat::csv));
    CHECK(emit_records(a) == emit_records(b));
    CHECK(emit_report(a, ReportFormat::csv) == emit_report(d, ReportFormat::csv));
    CHECK(emit_records(a) == emit_records(d));
    c.seed = 22;
    CHECK(emit_records(run_coverage_experiment(c)) != emit_records(a));
}

TEST_CASE("dataset r does not depend on the replication count") {
    ExperimentConfig c = small_value_config();
    c.replications = 3;
    const auto few = run_coverage_experiment(c);
    c.replications = 7;
    const auto many = run_coverage_experiment(c);
    const std::size_t methods = c.methods.size();
    for (std::size_t i = 0; i < c.sample_sizes.size(); ++i) {
        for (std::size_t r = 0; r < 3; ++r) {
            for (std::size_t k = 0; k < methods; ++k) {
                const auto& x = few.records[(i * 3 + r) * methods + k];
                const auto& y = many.records[(i * 7 + r) * methods + k];
                CHECK(x.replication == y.replication);
                CHECK(x.n == y.n);
                CHECK(x.lower == y.lower);
                CHECK(x.upper == y.upper);
            }
        }
    }
}

TEST_CASE("smaller beta covers every truth the larger beta covers") {
    for (ExperimentKind kind : {ExperimentKind::value, ExperimentKind::gap}) {
        ExperimentConfig c = default_experiment_config(ProblemKind::quadratic, kind);
        c.sample_sizes = {20};
        c.replications = 30;
        c.seed = 5;
        c.beta = 0.05;
        const auto loose = run_coverage_experiment(c);
        c.beta = 0.01;
        const auto tight = run_coverage_experiment(c);
        REQUIRE(loose.records.size() == tight.records.size());
        for (std::size_t k = 0; k < loose.records.size(); ++k) {
            if (loose.records[k].covered) CHECK(tight.records[k].covered);
        }
        for (std::size_t k = 0; k < loose.cells.size(); ++k) CHECK(tight.cells[k].coverage >= loose.cells[k].coverage);
    }
}

TEST_CASE("report cells") {
    ExperimentConfig c = small_value_config();
    c.sample_sizes = {10, 50, 100};
    c.replications = 5;
    const auto report = run_coverage_experiment(c);
    REQUIRE(report.cells.size() == 9);
    for (const auto& cell : report.cells) {
        CHECK(cell.coverage >= 0.0);
        CHECK(cell.coverage <= 1.0);
        CHECK(near(cell.mean_width, cell.mean_upper - cell.mean_lower, 1e-9));
        CHECK(cell.sd_width >= 0.0);
    }
    const std::string csv = emit_report(report, ReportFormat::csv);
    CHECK(line_count(csv) == 10);
    const auto parsed = parse_report_csv(csv);
    REQUIRE(parsed.size() == report.cells.size());
    for (std::size_t k = 0; k < parsed.size(); ++k) {
        const auto& a = parsed[k];
        const auto& b = report.cells[k];
        CHECK(a.method == b.method);
        CHECK(a.n == b.n);
        CHECK(near(a.coverage, b.coverage, 1e-12));
        CHECK(near(a.mean_lower, b.mean_lower, 1e-12));
        CHECK(near(a.mean_upper, b.mean_upper, 1e-12));
        CHECK(near(a.mean_width, b.mean_width, 1e-12));
        CHECK(near(a.sd_width, b.sd_width, 1e-12));
        CHECK(a.failures == b.failures);
    }
    const std::string md = emit_report(report, ReportFormat::markdown, 2);
    CHECK(line_count(md) == 11);
    CHECK(md.find("| n=10 | EL |") != std::string::npos);
}

TEST_CASE("empty report is a header row") {
    const CoverageReport empty;
    const std::string csv = emit_report(empty, ReportFormat::csv);
    CHECK(csv == "method,n,coverage,mean_lower,mean_upper,mean_width,sd_width,failures\n");
    CHECK(parse_report_csv(csv).empty());
    CHECK_THROWS_AS(parse_report_csv("method,n\n"), DataError);
    CHECK_THROWS_AS(parse_report_csv(csv + "EL,10,0.5\n"), DataError);
    CHECK_THROWS_AS(parse_report_csv(csv + "EL,10,x,1,2,1,0,0\n"), DataError);
}

TEST_CASE("failed replications are counted, not dropped") {
    ExperimentConfig c = default_experiment_config(ProblemKind::quadratic, ExperimentKind::value);
    c.methods = {CiMethod::clt2, CiMethod::clt};
    c.sample_sizes = {3};
    c.replications = 4;
    const auto report = run_coverage_experiment(c);
    REQUIRE(report.cells.size() == 2);
    CHECK(report.cells[0].failures == 4);
    CHECK(std::isnan(report.cells[0].coverage));
    CHECK(report.cells[1].failures == 0);
    for (const auto& rec : report.records) {
        if (rec.method == CiMethod::clt2) {
            CHECK(rec.failed);
            CHECK_FALSE(rec.error.empty());
        }
    }
}

TEST_CASE("experiment config validation lists every problem") {
    ExperimentConfig c;
    c.replications = 0;
    c.beta = 1.5;
    c.sample_sizes = {1};
    try {
        c.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.problems().size() == 3);
    }
    ExperimentConfig gap = default_experiment_config(ProblemKind::quadratic, ExperimentKind::gap);
    gap.methods = {CiMethod::clt};
    CHECK_THROWS_AS(gap.validate(), ConfigError);
    CHECK_NOTHROW(default_experiment_config(ProblemKind::portfolio, ExperimentKind::gap).validate());
}

TEST_CASE("experiment config documents") {
    const auto c = parse_experiment_config(R"({"problem": "cvar", "alpha": 0.8, "experiment": "gap",
        "solution": [0.5], "sample_sizes": [20, 40], "replications": 7, "beta": 0.1, "seed": 9,
        "methods": ["el", "SRP"], "jobs": 2, "restarts": 3})");
    CHECK(c.problem.kind == ProblemKind::cvar);
    CHECK(c.problem.alpha == 0.8);
    CHECK(c.kind == ExperimentKind::gap);
    CHECK(c.sample_sizes == std::vector<std::size_t>{20, 40});
    CHECK(c.replications == 7);
    CHECK(c.beta == 0.1);
    CHECK(c.seed == 9);
    CHECK(c.methods == std::vector<CiMethod>{CiMethod::el, CiMethod::srp});
    CHECK(c.jobs == 2);
    CHECK(c.dro.restarts == 3);

    const auto nested = parse_problem_spec(R"({"problem": "portfolio", "cov": [[1, 0], [0, 4]]})");
    const auto flat = parse_problem_spec(R"({"problem": "portfolio", "cov": [1, 0, 0, 4]})");
    CHECK(nested.cov == flat.cov);

    try {
        parse_experiment_config(R"({"problem": "quadratic", "replicates": 5, "beta": 2})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string all = e.what();
        CHECK(all.find("replicates") != std::string::npos);
        CHECK(e.problems().size() >= 2);
    }
    CHECK_THROWS_AS(parse_experiment_config("[1, 2]"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("{"), ConfigError);
    CHECK_THROWS_AS(read_text_file("/nonexistent/elsaa.json"), DataError);
}

} // TEST_SUITE
