#include "elsaa/harness.hpp"

#include "elsaa/error.hpp"
#include "elsaa/lp.hpp"
#include "elsaa/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace elsaa {

std::string to_string(ExperimentKind kind) { return kind == ExperimentKind::value ? "value" : "gap"; }

std::string to_string(OracleMode mode) { return mode == OracleMode::analytic ? "analytic" : "monte-carlo"; }

namespace {

bool needs_simulation(const ProblemSpec& spec, OracleMode mode) {
    return mode == OracleMode::monte_carlo || spec.kind == ProblemKind::portfolio;
}

double cvar_tail_constant(double alpha) {
    return stats::normal_pdf(stats::normal_quantile(alpha)) / (1.0 - alpha);
}

double quadratic_form(const ProblemSpec& spec, std::span<const double> x) {
    const std::size_t d = spec.dimension;
    double q = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) q += x[i] * spec.cov[i * d + j] * x[j];
    }
    return q;
}

double mean_return(const ProblemSpec& spec, std::span<const double> x) {
    double r = 0.0;
    for (std::size_t j = 0; j < spec.dimension; ++j) r += spec.mean[j] * x[j];
    return r;
}

// Analytic optimum of the one-dimensional problems.
std::vector<double> scalar_optimum(const ProblemSpec& spec) {
    const double mu = spec.mean[0];
    const double sigma = std::sqrt(spec.cov[0]);
    if (spec.kind == ProblemKind::quadratic) return {mu};
    return {mu + sigma * stats::normal_quantile(spec.alpha)};
}

// Expected objective of the one-dimensional problems under N(mu, sigma^2).
double scalar_expected_objective(const ProblemSpec& spec, double x) {
    const double mu = spec.mean[0];
    const double var = spec.cov[0];
    if (spec.kind == ProblemKind::quadratic) return var + (x - mu) * (x - mu);
    const double sigma = std::sqrt(var);
    if (sigma == 0.0) return x + std::max(mu - x, 0.0) / (1.0 - spec.alpha);
    const double k = (x - mu) / sigma;
    const double excess = sigma * (stats::normal_pdf(k) - k * (1.0 - stats::normal_cdf(k)));
    return x + excess / (1.0 - spec.alpha);
}

struct MonteCarloMean {
    double mean = 0.0;
    double standard_error = 0.0;
};

// Mean of f over draws from the problem's distribution, generated in blocks.
template <class F>
MonteCarloMean simulate(const ProblemSpec& spec, std::size_t draws, RandomSource& source, F&& f) {
    if (draws < 10'000) throw std::invalid_argument("Monte Carlo oracle needs at least 10^4 draws");
    const std::size_t block = 100'000;
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t done = 0;
    // Per-block partial sums limit round-off at large draw counts.
    while (done < draws) {
        const std::size_t count = std::min(block, draws - done);
        const SampleSet data = sample_mvnormal(source, spec.mean, spec.cov, count);
        double s = 0.0;
        double s2 = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            const double v = f(data.row(i));
            s += v;
            s2 += v * v;
        }
        sum += s;
        sum_sq += s2;
        done += count;
    }
    const double n = static_cast<double>(draws);
    MonteCarloMean out;
    out.mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * out.mean * out.mean) / (n - 1.0));
    out.standard_error = std::sqrt(var / n);
    return out;
}

} // namespace

double portfolio_normal_value(const ProblemSpec& spec, std::span<const double> x) {
    return -mean_return(spec, x) + cvar_tail_constant(spec.alpha) * std::sqrt(std::max(0.0, quadratic_form(spec, x)));
}

std::vector<double> portfolio_decision(const ProblemSpec& spec, std::span<const double> assets) {
    if (assets.size() != spec.dimension) throw std::invalid_argument("portfolio_decision: wrong number of assets");
    std::vector<double> x(assets.begin(), assets.end());
    const double sd = std::sqrt(std::max(0.0, quadratic_form(spec, assets)));
    x.push_back(-mean_return(spec, assets) + stats::normal_quantile(spec.alpha) * sd);
    return x;
}

std::vector<double> portfolio_normal_optimum(const ProblemSpec& spec) {
    const std::size_t d = spec.dimension;
    // Feasible region {x >= 0, sum x = 1, mu'x >= r_b}; linear minimization
    // over it is an LP, which drives a Frank-Wolfe iteration with exact line
    // search on the convex normal-theory objective.
    LinearProgram lp;
    lp.objective.assign(d, 0.0);
    std::vector<double> ret(d);
    for (std::size_t j = 0; j < d; ++j) ret[j] = -spec.mean[j];
    lp.inequality_rows.push_back(ret);
    lp.inequality_rhs.push_back(-spec.r_b);
    lp.equality_rows.push_back(std::vector<double>(d, 1.0));
    lp.equality_rhs.push_back(1.0);

    auto f = [&](std::span<const double> x) { return portfolio_normal_value(spec, x); };
    LpResult start = solve_lp(lp);
    if (start.status != LpStatus::optimal) throw SolverError("no portfolio meets the required mean return");
    std::vector<double> x = start.x;

    const double k = cvar_tail_constant(spec.alpha);
    for (int it = 0; it < 5000; ++it) {
        std::vector<double> grad(d);
        const double sd = std::sqrt(std::max(0.0, quadratic_form(spec, x)));
        for (std::size_t i = 0; i < d; ++i) {
            double sx = 0.0;
            for (std::size_t j = 0; j < d; ++j) sx += spec.cov[i * d + j] * x[j];
            grad[i] = -spec.mean[i] + (sd > 0.0 ? k * sx / sd : 0.0);
        }
        lp.objective = grad;
        const LpResult vertex = solve_lp(lp);
        double fw_gap = 0.0;
        for (std::size_t i = 0; i < d; ++i) fw_gap += grad[i] * (x[i] - vertex.x[i]);
        if (fw_gap <= 1e-13) break;
        // Golden-section search on the segment [x, vertex].
        auto at = [&](double t) {
            std::vector<double> y(d);
            for (std::size_t i = 0; i < d; ++i) y[i] = x[i] + t * (vertex.x[i] - x[i]);
            return y;
        };
        const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
        double a = 0.0;
        double b = 1.0;
        double c = b - ratio * (b - a);
        double e = a + ratio * (b - a);
        double fc = f(at(c));
        double fe = f(at(e));
        while (b - a > 1e-14) {
            if (fc <= fe) {
                b = e;
                e = c;
                fe = fc;
                c = b - ratio * (b - a);
                fc = f(at(c));
            } else {
                a = c;
                c = e;
                fc = fe;
                e = a + ratio * (b - a);
                fe = f(at(e));
            }
        }
        double t = 0.5 * (a + b);
        if (f(at(1.0)) <= f(at(t))) t = 1.0;
        x = at(t);
    }
    return x;
}

OracleTruth true_value_oracle(const ProblemSpec& spec, std::size_t draws, RandomSource source, OracleMode mode) {
    const StochasticProgram program = make_program(spec);
    OracleTruth truth;
    if (!needs_simulation(spec, mode)) {
        truth.value = scalar_expected_objective(spec, scalar_optimum(spec)[0]);
        return truth;
    }
    const std::vector<double> x = spec.kind == ProblemKind::portfolio
                                      ? portfolio_decision(spec, portfolio_normal_optimum(spec))
                                      : scalar_optimum(spec);
    const MonteCarloMean mc =
        simulate(spec, draws, source, [&](std::span<const double> xi) { return program.objective(x, xi); });
    truth.value = mc.mean;
    truth.standard_error = mc.standard_error;
    truth.analytic = false;
    return truth;
}

OracleTruth true_gap_oracle(const ProblemSpec& spec, std::span<const double> x_hat, std::size_t draws,
                            RandomSource source, OracleMode mode) {
    const StochasticProgram program = make_program(spec);
    if (x_hat.size() != program.p()) throw std::invalid_argument("true_gap_oracle: candidate has the wrong dimension");
    OracleTruth truth;
    if (!needs_simulation(spec, mode)) {
        truth.value = scalar_expected_objective(spec, x_hat[0]) - scalar_expected_objective(spec, scalar_optimum(spec)[0]);
        return truth;
    }
    const std::vector<double> x = spec.kind == ProblemKind::portfolio
                                      ? portfolio_decision(spec, portfolio_normal_optimum(spec))
                                      : scalar_optimum(spec);
    // Common draws for both decisions.
    const MonteCarloMean mc = simulate(spec, draws, source, [&](std::span<const double> xi) {
        return program.objective(x_hat, xi) - program.objective(x, xi);
    });
    truth.value = mc.mean;
    truth.standard_error = mc.standard_error;
    truth.analytic = false;
    return truth;
}

void ExperimentConfig::validate() const {
    std::vector<std::string> errors = problem_spec_errors(problem);
    if (sample_sizes.empty()) errors.push_back("sample_sizes must not be empty");
    for (std::size_t n : sample_sizes) {
        if (n < 2) {
            errors.push_back("every sample size must be >= 2");
            break;
        }
    }
    if (replications < 1) errors.push_back("replications must be >= 1");
    if (!(beta > 0.0 && beta < 1.0)) errors.push_back("beta must lie in (0, 1)");
    if (methods.empty()) errors.push_back("methods must not be empty");
    for (CiMethod m : methods) {
        if (kind == ExperimentKind::value && m == CiMethod::srp) {
            errors.push_back("method SRP only applies to gap experiments");
        }
        if (kind == ExperimentKind::gap && (m == CiMethod::clt || m == CiMethod::clt2)) {
            errors.push_back("method " + to_string(m) + " only applies to value experiments");
        }
    }
    if (jobs < 0) errors.push_back("jobs must be >= 0");
    if (needs_simulation(problem, oracle) && oracle_draws < 10'000) {
        errors.push_back("oracle_draws must be >= 10000 for a simulated truth");
    }
    if (kind == ExperimentKind::gap) {
        const std::size_t p = problem.kind == ProblemKind::portfolio ? problem.dimension + 1 : 1;
        const bool assets_only = problem.kind == ProblemKind::portfolio && solution.size() == problem.dimension;
        if (solution.size() != p && !assets_only) {
            errors.push_back("solution has " + std::to_string(solution.size()) + " entries, expected " +
                             std::to_string(p) +
                             (problem.kind == ProblemKind::portfolio
                                  ? " (or " + std::to_string(problem.dimension) + " asset weights)"
                                  : std::string()));
        }
    }
    if (dro.restarts < 1) errors.push_back("restarts must be >= 1");
    if (dro.max_cut_iterations < 1) errors.push_back("max_cut_iterations must be >= 1");
    if (!errors.empty()) throw ConfigError(std::move(errors));
}

ExperimentConfig default_experiment_config(ProblemKind problem, ExperimentKind kind) {
    ExperimentConfig cfg;
    cfg.problem = default_problem_spec(problem);
    cfg.kind = kind;
    if (kind == ExperimentKind::value) {
        cfg.methods = {CiMethod::el, CiMethod::clt, CiMethod::clt2};
    } else {
        cfg.methods = {CiMethod::el, CiMethod::srp};
        switch (problem) {
        case ProblemKind::quadratic: cfg.solution = {0.62}; break;
        case ProblemKind::cvar: cfg.solution = {0.71}; break;
        case ProblemKind::portfolio: cfg.solution = {0.21, 0.79}; break;
        }
    }
    if (problem == ProblemKind::portfolio) cfg.oracle = OracleMode::monte_carlo;
    return cfg;
}

namespace {

std::vector<double> full_candidate(const ExperimentConfig& config) {
    if (config.problem.kind == ProblemKind::portfolio && config.solution.size() == config.problem.dimension) {
        return portfolio_decision(config.problem, config.solution);
    }
    return config.solution;
}

ConfidenceInterval run_method(CiMethod method, const ExperimentConfig& config, const StochasticProgram& program,
                              const SampleSet& data, std::span<const double> x_hat, const DroOptions& dro) {
    if (config.kind == ExperimentKind::value) {
        switch (method) {
        case CiMethod::el: return el_ci_optimal_value(program, data, config.beta, dro);
        case CiMethod::clt: return clt_ci(program, data, config.beta);
        case CiMethod::clt2: return clt2_ci(program, data, config.beta);
        case CiMethod::srp: break;
        }
    } else {
        switch (method) {
        case CiMethod::el: return el_ci_gap(program, data, x_hat, config.beta, dro);
        case CiMethod::srp: return srp_gap_ci(program, data, x_hat, config.beta);
        default: break;
        }
    }
    throw std::invalid_argument("method " + to_string(method) + " does not apply to " + to_string(config.kind) +
                                " experiments");
}

} // namespace

CoverageReport run_coverage_experiment(const ExperimentConfig& config) {
    config.validate();
    const StochasticProgram program = make_program(config.problem);
    const RandomSource master(config.seed);
    const std::vector<double> x_hat = config.kind == ExperimentKind::gap ? full_candidate(config) : std::vector<double>{};

    CoverageReport report;
    report.truth = config.kind == ExperimentKind::value
                       ? true_value_oracle(config.problem, config.oracle_draws, master.stream(0), config.oracle)
                       : true_gap_oracle(config.problem, x_hat, config.oracle_draws, master.stream(0), config.oracle);
    const double truth = report.truth.value;

    const std::size_t sizes = config.sample_sizes.size();
    const std::size_t reps = static_cast<std::size_t>(config.replications);
    const std::size_t methods = config.methods.size();
    std::vector<ReplicationRecord> records(sizes * reps * methods);

    auto run_task = [&](std::size_t task) {
        const std::size_t i = task / reps;
        const std::size_t r = task % reps;
        const std::size_t n = config.sample_sizes[i];
        RandomSource source = master.family(i).stream(r);
        const SampleSet data = sample_mvnormal(source, config.problem.mean, config.problem.cov, n);
        DroOptions dro = config.dro;
        dro.seed = source.next_u64();
        for (std::size_t k = 0; k < methods; ++k) {
            ReplicationRecord& rec = records[task * methods + k];
            rec.method = config.methods[k];
            rec.n = n;
            rec.replication = static_cast<int>(r);
            try {
                const ConfidenceInterval ci = run_method(config.methods[k], config, program, data, x_hat, dro);
                rec.lower = ci.lower;
                rec.upper = ci.upper;
                rec.covered = ci.lower <= truth && truth <= ci.upper;
            } catch (const std::exception& e) {
                rec.failed = true;
                rec.error = e.what();
                rec.lower = rec.upper = std::numeric_limits<double>::quiet_NaN();
            }
        }
    };

    const std::size_t tasks = sizes * reps;
    unsigned workers = config.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                        : static_cast<unsigned>(config.jobs);
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, tasks));
    if (workers <= 1) {
        for (std::size_t t = 0; t < tasks; ++t) run_task(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < workers; ++k) {
            pool.emplace_back([&] {
                for (std::size_t t = next++; t < tasks; t = next++) run_task(t);
            });
        }
        for (auto& th : pool) th.join();
    }

    for (std::size_t i = 0; i < sizes; ++i) {
        for (std::size_t k = 0; k < methods; ++k) {
            CoverageCell cell;
            cell.method = config.methods[k];
            cell.n = config.sample_sizes[i];
            int ok = 0;
            int covered = 0;
            double sum_lo = 0.0;
            double sum_hi = 0.0;
            double sum_w = 0.0;
            for (std::size_t r = 0; r < reps; ++r) {
                const ReplicationRecord& rec = records[(i * reps + r) * methods + k];
                if (rec.failed) {
                    ++cell.failures;
                    continue;
                }
                ++ok;
                covered += rec.covered ? 1 : 0;
                sum_lo += rec.lower;
                sum_hi += rec.upper;
                sum_w += rec.upper - rec.lower;
            }
            if (ok == 0) {
                const double nan = std::numeric_limits<double>::quiet_NaN();
                cell.coverage = cell.mean_lower = cell.mean_upper = cell.mean_width = cell.sd_width = nan;
            } else {
                cell.coverage = static_cast<double>(covered) / ok;
                cell.mean_lower = sum_lo / ok;
                cell.mean_upper = sum_hi / ok;
                cell.mean_width = sum_w / ok;
                double ss = 0.0;
                for (std::size_t r = 0; r < reps; ++r) {
                    const ReplicationRecord& rec = records[(i * reps + r) * methods + k];
                    if (rec.failed) continue;
                    const double dev = rec.upper - rec.lower - cell.mean_width;
                    ss += dev * dev;
                }
                cell.sd_width = ok > 1 ? std::sqrt(ss / (ok - 1)) : 0.0;
            }
            report.cells.push_back(cell);
        }
    }
    report.records = std::move(records);
    return report;
}

namespace {

std::string format_number(double v, const char* fmt) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

std::string round_trip(double v) { return format_number(v, "%.17g"); }

} // namespace

std::string emit_report(const CoverageReport& report, ReportFormat format, int precision) {
    std::ostringstream out;
    if (format == ReportFormat::csv) {
        out << "method,n,coverage,mean_lower,mean_upper,mean_width,sd_width,failures\n";
        for (const auto& c : report.cells) {
            out << to_string(c.method) << ',' << c.n << ',' << round_trip(c.coverage) << ','
                << round_trip(c.mean_lower) << ',' << round_trip(c.mean_upper) << ',' << round_trip(c.mean_width)
                << ',' << round_trip(c.sd_width) << ',' << c.failures << '\n';
        }
        return out.str();
    }
    const std::string fmt = "%." + std::to_string(std::max(0, precision)) + "f";
    out << "| n | method | coverage probability | mean lower bound | mean upper bound | mean interval width | "
           "sd of interval width | failures |\n";
    out << "|---|---|---|---|---|---|---|---|\n";
    std::size_t last_n = 0;
    for (const auto& c : report.cells) {
        const std::string n_label = c.n != last_n ? "n=" + std::to_string(c.n) : "";
        last_n = c.n;
        out << "| " << n_label << " | " << to_string(c.method) << " | " << format_number(c.coverage, fmt.c_str())
            << " | " << format_number(c.mean_lower, fmt.c_str()) << " | " << format_number(c.mean_upper, fmt.c_str())
            << " | " << format_number(c.mean_width, fmt.c_str()) << " | " << format_number(c.sd_width, fmt.c_str())
            << " | " << c.failures << " |\n";
    }
    return out.str();
}

std::string emit_records(const CoverageReport& report) {
    std::ostringstream out;
    out << "method,n,replication,lower,upper,covered,failed,error\n";
    for (const auto& r : report.records) {
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        out << to_string(r.method) << ',' << r.n << ',' << r.replication << ',' << round_trip(r.lower) << ','
            << round_trip(r.upper) << ',' << (r.covered ? 1 : 0) << ',' << (r.failed ? 1 : 0) << ',' << err << '\n';
    }
    return out.str();
}

std::vector<CoverageCell> parse_report_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "method,n,coverage,mean_lower,mean_upper,mean_width,sd_width,failures") {
        throw DataError("coverage CSV: unexpected header");
    }
    std::vector<CoverageCell> cells;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 8) throw DataError("coverage CSV line " + std::to_string(line_no) + ": expected 8 fields");
        try {
            CoverageCell c;
            c.method = ci_method_from_string(fields[0]);
            c.n = static_cast<std::size_t>(std::stoull(fields[1]));
            c.coverage = std::stod(fields[2]);
            c.mean_lower = std::stod(fields[3]);
            c.mean_upper = std::stod(fields[4]);
            c.mean_width = std::stod(fields[5]);
            c.sd_width = std::stod(fields[6]);
            c.failures = std::stoi(fields[7]);
            cells.push_back(c);
        } catch (const std::exception& e) {
            throw DataError("coverage CSV line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cells;
}

} // namespace elsaa
