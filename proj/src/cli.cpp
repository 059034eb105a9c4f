#include "elsaa/cli.hpp"

#include "elsaa/config.hpp"
#include "elsaa/error.hpp"
#include "elsaa/estimators.hpp"
#include "elsaa/harness.hpp"

#include <CLI11.hpp>

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

namespace elsaa {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(trim(f));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::optional<double> to_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::vector<double> parse_vector(const std::string& text, const std::string& what) {
    std::vector<double> v;
    for (const auto& f : split_fields(text)) {
        const auto x = to_number(f);
        if (!x) throw std::invalid_argument(what + ": '" + f + "' is not a number");
        v.push_back(*x);
    }
    if (v.empty()) throw std::invalid_argument(what + " is empty");
    return v;
}

struct Common {
    std::string problem = "quadratic";
    std::string config;
    std::string data;
    std::string method = "el";
    double beta = 0.05;
    std::optional<double> alpha;
    std::optional<double> r_b;
    std::uint64_t seed = 0;
    int precision = 4;
    std::string solution;
};

ProblemSpec resolve_spec(const Common& c) {
    ProblemSpec spec = c.config.empty() ? default_problem_spec(problem_kind_from_string(c.problem))
                                        : parse_problem_spec(read_text_file(c.config));
    if (c.alpha) spec.alpha = *c.alpha;
    if (c.r_b) spec.r_b = *c.r_b;
    return spec;
}

SampleSet load_data(const std::string& path, const StochasticProgram& program) {
    const SampleSet data = parse_samples_csv(read_text_file(path));
    if (data.cols() != program.data_dim) {
        throw DataError("data file has " + std::to_string(data.cols()) + " columns but problem '" + program.name +
                        "' expects " + std::to_string(program.data_dim));
    }
    return data;
}

void print_interval(std::ostream& out, const ConfidenceInterval& ci, int precision) {
    out << "method=" << to_string(ci.method) << '\n';
    out << "beta=" << ci.beta << '\n';
    if (ci.df_used) out << "df=" << *ci.df_used << '\n';
    out << std::fixed << std::setprecision(precision);
    out << "lower=" << ci.lower << '\n';
    out << "upper=" << ci.upper << '\n';
    out.unsetf(std::ios::floatfield);
    out << std::setprecision(6);
    if (ci.degenerate) out << "degenerate=1\n";
    if (ci.diagnostics) {
        const DroDiagnostics& d = *ci.diagnostics;
        out << "max_side_iterations=" << d.max_side_iterations << '\n';
        out << "max_side_gap=" << d.max_side_gap << '\n';
        out << "max_side_converged=" << (d.max_side_converged ? 1 : 0) << '\n';
        out << "min_side_alternations=" << d.min_side_alternations << '\n';
        out << "restarts=" << d.restarts << '\n';
        out << "restart_dispersion=" << d.restart_dispersion << '\n';
        out << "inner_failures=" << d.inner_failures << '\n';
    }
}

int ci_value(const Common& c, std::ostream& out) {
    const ProblemSpec spec = resolve_spec(c);
    const StochasticProgram program = make_program(spec);
    const SampleSet data = load_data(c.data, program);
    const CiMethod method = ci_method_from_string(c.method);
    if (method == CiMethod::srp) throw std::invalid_argument("method srp gives gap intervals; use ci-gap");
    if (method == CiMethod::clt2 && data.rows() < 4) {
        throw DataError("method clt2 needs at least 4 observations, data has " + std::to_string(data.rows()));
    }
    if (data.rows() < 2) throw DataError("need at least 2 observations, data has " + std::to_string(data.rows()));
    DroOptions options;
    options.seed = c.seed;
    ConfidenceInterval ci;
    switch (method) {
    case CiMethod::el: ci = el_ci_optimal_value(program, data, c.beta, options); break;
    case CiMethod::clt: ci = clt_ci(program, data, c.beta); break;
    default: ci = clt2_ci(program, data, c.beta); break;
    }
    print_interval(out, ci, c.precision);
    return kExitOk;
}

int ci_gap(const Common& c, std::ostream& out) {
    const ProblemSpec spec = resolve_spec(c);
    const StochasticProgram program = make_program(spec);
    std::vector<double> x_hat = parse_vector(c.solution, "--solution");
    if (spec.kind == ProblemKind::portfolio && x_hat.size() == spec.dimension) {
        x_hat = portfolio_decision(spec, x_hat);
    }
    if (x_hat.size() != program.p()) {
        throw std::invalid_argument("--solution has " + std::to_string(x_hat.size()) + " entries but problem '" +
                                    program.name + "' has decision dimension " + std::to_string(program.p()));
    }
    const SampleSet data = load_data(c.data, program);
    if (data.rows() < 2) throw DataError("need at least 2 observations, data has " + std::to_string(data.rows()));
    const CiMethod method = ci_method_from_string(c.method);
    DroOptions options;
    options.seed = c.seed;
    ConfidenceInterval ci;
    if (method == CiMethod::el) {
        ci = el_ci_gap(program, data, x_hat, c.beta, options);
    } else if (method == CiMethod::srp) {
        ci = srp_gap_ci(program, data, x_hat, c.beta);
    } else {
        throw std::invalid_argument("ci-gap supports methods el and srp");
    }
    print_interval(out, ci, c.precision);
    return kExitOk;
}

int bench(const std::string& config_path, const std::string& output, std::optional<std::uint64_t> seed,
          std::optional<int> jobs, int precision, std::ostream& out) {
    ExperimentConfig cfg = parse_experiment_config(read_text_file(config_path));
    if (seed) cfg.seed = *seed;
    if (jobs) cfg.jobs = *jobs;
    cfg.validate();
    const CoverageReport report = run_coverage_experiment(cfg);
    const std::string csv = emit_report(report, ReportFormat::csv);
    const std::string md = emit_report(report, ReportFormat::markdown, precision);
    auto write = [](const std::string& path, const std::string& text) {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw DataError("cannot write '" + path + "'");
        f << text;
    };
    write(output + ".csv", csv);
    write(output + ".md", md);
    write(output + "_records.csv", emit_records(report));
    out << "truth=" << std::setprecision(10) << report.truth.value;
    if (!report.truth.analytic) out << " (standard error " << report.truth.standard_error << ")";
    out << '\n' << md;
    return kExitOk;
}

int problems_list(std::ostream& out) {
    out << "name,decision_dim,data_dim,stochastic_constraints,solver,defaults\n";
    out << "quadratic,1,1,0,closed-form,xi~N(0;1)\n";
    out << "cvar,1,1,0,closed-form,alpha=0.9 xi~N(0;1)\n";
    out << "portfolio,3,2,1,lp,alpha=0.9 r_b=1 xi~N((0.8;1.2);diag(1;4))\n";
    return kExitOk;
}

void add_common(CLI::App* cmd, Common& c, bool gap) {
    cmd->add_option("--problem", c.problem, "quadratic, cvar or portfolio")->default_val("quadratic");
    cmd->add_option("--config", c.config, "problem spec JSON (overrides --problem)");
    cmd->add_option("--data", c.data, "CSV file, one observation per row")->required();
    cmd->add_option("--method", c.method, gap ? "el or srp" : "el, clt or clt2")->default_val("el");
    cmd->add_option("--beta", c.beta, "one minus the confidence level")->default_val(0.05);
    cmd->add_option("--alpha", c.alpha, "CVaR level override");
    cmd->add_option("--r-b", c.r_b, "portfolio return floor override");
    cmd->add_option("--seed", c.seed, "seed for solver restarts")->default_val(0);
    cmd->add_option("--precision", c.precision, "decimals printed for the interval")->default_val(4);
    if (gap) cmd->add_option("--solution", c.solution, "candidate decision, comma separated")->required();
}

} // namespace

SampleSet parse_samples_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        std::vector<double> row;
        bool numeric = true;
        for (const auto& f : fields) {
            const auto v = to_number(f);
            if (!v) {
                numeric = false;
                break;
            }
            row.push_back(*v);
        }
        if (!numeric) {
            if (first) {
                first = false;
                continue;
            }
            throw DataError("malformed CSV: line " + std::to_string(line_no) + " has a non-numeric field");
        }
        first = false;
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw DataError("malformed CSV: line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                            " fields, expected " + std::to_string(rows.front().size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("data file has no observations");
    return SampleSet::from_rows(rows);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Empirical-likelihood confidence intervals for stochastic optimization"};
    app.require_subcommand(1);
    Common value_args;
    Common gap_args;
    auto* value_cmd = app.add_subcommand("ci-value", "confidence interval for the optimal value");
    add_common(value_cmd, value_args, false);
    auto* gap_cmd = app.add_subcommand("ci-gap", "confidence interval for the optimality gap of a candidate");
    add_common(gap_cmd, gap_args, true);

    std::string bench_config;
    std::string bench_output = "coverage";
    std::optional<std::uint64_t> bench_seed;
    std::optional<int> bench_jobs;
    int bench_precision = 2;
    auto* bench_cmd = app.add_subcommand("bench", "coverage experiment from a JSON config");
    bench_cmd->add_option("--config", bench_config, "experiment config JSON")->required();
    bench_cmd->add_option("--output", bench_output, "prefix for the .csv, .md and _records.csv files");
    bench_cmd->add_option("--seed", bench_seed, "master seed (overrides the config)");
    bench_cmd->add_option("--jobs", bench_jobs, "worker threads, 0 for all cores");
    bench_cmd->add_option("--precision", bench_precision, "decimals in the markdown table");
    auto* list_cmd = app.add_subcommand("problems-list", "list the built-in problems");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*value_cmd) return ci_value(value_args, out);
        if (*gap_cmd) return ci_gap(gap_args, out);
        if (*bench_cmd) return bench(bench_config, bench_output, bench_seed, bench_jobs, bench_precision, out);
        if (*list_cmd) return problems_list(out);
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << '\n';
        return kExitSolver;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitSolver;
    }
    return kExitUsage;
}

} // namespace elsaa
