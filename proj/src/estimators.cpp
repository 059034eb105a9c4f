#include "elsaa/estimators.hpp"

#include "elsaa/error.hpp"
#include "elsaa/stats.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace elsaa {

std::string to_string(CiMethod method) {
    switch (method) {
    case CiMethod::el: return "EL";
    case CiMethod::clt: return "CLT";
    case CiMethod::clt2: return "CLT2";
    case CiMethod::srp: return "SRP";
    }
    return "unknown";
}

CiMethod ci_method_from_string(const std::string& name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (lower == "el") return CiMethod::el;
    if (lower == "clt") return CiMethod::clt;
    if (lower == "clt2") return CiMethod::clt2;
    if (lower == "srp") return CiMethod::srp;
    throw std::invalid_argument("unknown method '" + name + "' (expected el, clt, clt2 or srp)");
}

int el_degrees_of_freedom(const StochasticProgram& program) {
    const int p = static_cast<int>(program.p());
    const int m = static_cast<int>(program.m());
    return m == 0 ? p + 1 : p + m + 1;
}

namespace {

void check_beta(double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
}

void check_rows(const SampleSet& samples, std::size_t minimum, const char* what) {
    if (samples.rows() < minimum) {
        throw std::invalid_argument(std::string(what) + " needs at least " + std::to_string(minimum) +
                                    " observations, got " + std::to_string(samples.rows()));
    }
}

void check_candidate(const StochasticProgram& program, std::span<const double> x_hat) {
    if (x_hat.size() != program.p()) {
        throw std::invalid_argument("candidate solution has dimension " + std::to_string(x_hat.size()) +
                                    ", problem expects " + std::to_string(program.p()));
    }
}

WeightedSaaSolution checked_saa(const StochasticProgram& program, const SampleSet& samples) {
    WeightedSaaSolution sol = solve_saa(program, samples);
    if (!sol.converged) throw SolverError("SAA solver did not converge");
    if (!sol.feasible) throw SolverError("SAA problem is infeasible");
    return sol;
}

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
};

// Mean and 1/(n-1) standard deviation.
Moments moments(const std::vector<double>& v) {
    Moments m;
    for (double x : v) m.mean += x;
    m.mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    return m;
}

} // namespace

ConfidenceInterval el_ci_optimal_value(const StochasticProgram& program, const SampleSet& samples, double beta,
                                       const DroOptions& options) {
    check_beta(beta);
    check_rows(samples, 2, "EL interval");
    const int df = el_degrees_of_freedom(program);
    const DivergenceBall ball = DivergenceBall::calibrated(df, beta, samples.rows());
    const DroBounds b = dro_bounds(program, samples, ball, options);
    ConfidenceInterval ci;
    ci.lower = b.lower;
    ci.upper = b.upper;
    ci.beta = beta;
    ci.method = CiMethod::el;
    ci.df_used = df;
    ci.diagnostics = b.diagnostics;
    return ci;
}

ConfidenceInterval el_ci_gap(const StochasticProgram& program, const SampleSet& samples,
                             std::span<const double> x_hat, double beta, const DroOptions& options) {
    check_beta(beta);
    check_rows(samples, 2, "EL interval");
    check_candidate(program, x_hat);
    const int df = el_degrees_of_freedom(program);
    const DivergenceBall ball = DivergenceBall::calibrated(df, beta, samples.rows());
    const DroBounds b = gap_bounds(program, samples, ball, x_hat, options);
    ConfidenceInterval ci;
    ci.lower = b.lower;
    ci.upper = b.upper;
    ci.beta = beta;
    ci.method = CiMethod::el;
    ci.df_used = df;
    ci.diagnostics = b.diagnostics;
    return ci;
}

ConfidenceInterval clt_ci(const StochasticProgram& program, const SampleSet& samples, double beta) {
    check_beta(beta);
    check_rows(samples, 2, "CLT interval");
    const WeightedSaaSolution sol = checked_saa(program, samples);
    const Moments mo = moments(objective_values(program, samples, sol.x));
    const double half = stats::normal_quantile(1.0 - beta / 2.0) * mo.sd / std::sqrt(static_cast<double>(samples.rows()));
    ConfidenceInterval ci;
    ci.lower = sol.value - half;
    ci.upper = sol.value + half;
    ci.beta = beta;
    ci.method = CiMethod::clt;
    ci.degenerate = mo.sd == 0.0;
    return ci;
}

ConfidenceInterval clt2_ci(const StochasticProgram& program, const SampleSet& samples, double beta) {
    check_beta(beta);
    check_rows(samples, 4, "CLT2 interval");
    const std::size_t first = (samples.rows() + 1) / 2;
    const std::size_t second = samples.rows() - first;
    const SampleSet solve_half = samples.slice(0, first);
    const SampleSet eval_half = samples.slice(first, second);
    const WeightedSaaSolution sol = checked_saa(program, solve_half);
    const Moments in_sample = moments(objective_values(program, solve_half, sol.x));
    const Moments out_sample = moments(objective_values(program, eval_half, sol.x));
    const double z = stats::normal_quantile(1.0 - beta / 2.0);
    ConfidenceInterval ci;
    ci.lower = sol.value - z * in_sample.sd / std::sqrt(static_cast<double>(first));
    ci.upper = out_sample.mean + z * out_sample.sd / std::sqrt(static_cast<double>(second));
    ci.beta = beta;
    ci.method = CiMethod::clt2;
    ci.degenerate = in_sample.sd == 0.0 && out_sample.sd == 0.0;
    if (ci.upper < ci.lower) {
        // The held-out estimate fell below the in-sample one by more than
        // both margins; report the empty-looking interval as a point.
        ci.upper = ci.lower = 0.5 * (ci.lower + ci.upper);
        ci.degenerate = true;
    }
    return ci;
}

ConfidenceInterval srp_gap_ci(const StochasticProgram& program, const SampleSet& samples,
                              std::span<const double> x_hat, double beta) {
    check_beta(beta);
    check_rows(samples, 2, "SRP interval");
    check_candidate(program, x_hat);
    const WeightedSaaSolution sol = checked_saa(program, samples);
    const std::vector<double> at_hat = objective_values(program, samples, x_hat);
    const std::vector<double> at_saa = objective_values(program, samples, sol.x);
    std::vector<double> diff(at_hat.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = at_hat[i] - at_saa[i];
    const Moments mo = moments(diff);
    ConfidenceInterval ci;
    ci.lower = 0.0;
    ci.upper = std::max(0.0, mo.mean + stats::normal_quantile(1.0 - beta) * mo.sd /
                                           std::sqrt(static_cast<double>(samples.rows())));
    ci.beta = beta;
    ci.method = CiMethod::srp;
    ci.degenerate = mo.sd == 0.0;
    return ci;
}

} // namespace elsaa
