#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "elsaa/drosolve.hpp"
#include "elsaa/estimators.hpp"
#include "elsaa/problems.hpp"
#include "elsaa/random.hpp"

namespace elsaa {

enum class ExperimentKind { value, gap };
enum class OracleMode { analytic, monte_carlo };

std::string to_string(ExperimentKind kind);
std::string to_string(OracleMode mode);

struct ExperimentConfig {
    ProblemSpec problem = default_problem_spec(ProblemKind::quadratic);
    ExperimentKind kind = ExperimentKind::value;
    std::vector<std::size_t> sample_sizes{10, 50, 100};
    int replications = 100;
    double beta = 0.05;
    std::uint64_t seed = 0;
    std::vector<CiMethod> methods{CiMethod::el, CiMethod::clt, CiMethod::clt2};
    /// Analytic truths exist for the quadratic and CVaR problems only; the
    /// portfolio truth is always estimated by simulation.
    OracleMode oracle = OracleMode::analytic;
    std::size_t oracle_draws = 10'000'000;
    /// Candidate for gap experiments. For the portfolio an asset-only vector
    /// is completed with the value-at-risk level under the data distribution.
    std::vector<double> solution;
    /// Worker threads; 0 uses every hardware thread.
    int jobs = 1;
    DroOptions dro;

    /// Throws ConfigError listing every violated requirement.
    void validate() const;
};

/// Defaults for the built-in experiments: EL, CLT and CLT2 for values; EL
/// and SRP for gaps with candidates 0.62 (quadratic), 0.71 (cvar) and
/// (0.21, 0.79) (portfolio). Portfolio truths are simulated.
ExperimentConfig default_experiment_config(ProblemKind problem, ExperimentKind kind);

struct OracleTruth {
    double value = 0.0;
    /// Zero for analytic truths.
    double standard_error = 0.0;
    bool analytic = true;
};

/// z* of the built-in problem under its normal data distribution. Analytic
/// for quadratic (variance) and CVaR (mu + sigma phi(z_alpha) / (1 - alpha))
/// unless `mode` asks for simulation; the portfolio is simulated at the
/// optimum of the normal-theory problem. Throws for draws < 10^4 when
/// simulating.
OracleTruth true_value_oracle(const ProblemSpec& spec, std::size_t draws, RandomSource source,
                              OracleMode mode = OracleMode::analytic);

/// h(x_hat) - z* with the same conventions.
OracleTruth true_gap_oracle(const ProblemSpec& spec, std::span<const double> x_hat, std::size_t draws,
                            RandomSource source, OracleMode mode = OracleMode::analytic);

/// Optimal portfolio weights (assets only) of the normal-theory problem
/// min -mu'x + k sqrt(x' Sigma x), k = phi(z_alpha) / (1 - alpha), over the
/// simplex with mu'x >= r_b. Throws SolverError when no portfolio meets r_b.
std::vector<double> portfolio_normal_optimum(const ProblemSpec& spec);

/// Normal-theory CVaR objective at asset weights x (its minimum over c).
double portfolio_normal_value(const ProblemSpec& spec, std::span<const double> x);

/// Completes asset weights with the optimal threshold c under normal data.
std::vector<double> portfolio_decision(const ProblemSpec& spec, std::span<const double> assets);

struct ReplicationRecord {
    CiMethod method = CiMethod::el;
    std::size_t n = 0;
    int replication = 0;
    double lower = 0.0;
    double upper = 0.0;
    bool covered = false;
    bool failed = false;
    std::string error;
};

struct CoverageCell {
    CiMethod method = CiMethod::el;
    std::size_t n = 0;
    /// Fraction of successful replications whose interval holds the truth;
    /// NaN when every replication failed.
    double coverage = 0.0;
    double mean_lower = 0.0;
    double mean_upper = 0.0;
    double mean_width = 0.0;
    /// 1/(k-1) standard deviation over the k successful replications.
    double sd_width = 0.0;
    int failures = 0;
};

struct CoverageReport {
    OracleTruth truth;
    std::vector<CoverageCell> cells;
    std::vector<ReplicationRecord> records;
};

/// Dataset r at sample size index i comes from
/// RandomSource(seed).family(i).stream(r), so it does not depend on the
/// replication count, the method list or the thread count.
CoverageReport run_coverage_experiment(const ExperimentConfig& config);

enum class ReportFormat { csv, markdown };

/// CSV columns: method,n,coverage,mean_lower,mean_upper,mean_width,sd_width,failures
/// with round-trip precision. Markdown rounds to `precision` decimals.
std::string emit_report(const CoverageReport& report, ReportFormat format, int precision = 2);

/// Raw replication records as CSV.
std::string emit_records(const CoverageReport& report);

/// Parses the CSV written by emit_report. Throws DataError when malformed.
std::vector<CoverageCell> parse_report_csv(const std::string& text);

} // namespace elsaa
