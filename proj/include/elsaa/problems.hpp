#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "elsaa/divergence.hpp"
#include "elsaa/sample_set.hpp"

namespace elsaa {

enum class InnerSolverKind { closed_form, lp_reducible, generic };

/// Optimizer of the weighted sample problem
///   min_x sum w_i H(x; xi_i)  s.t.  sum w_i F_k(x; xi_i) <= 0,  g_k(x) <= 0.
struct WeightedSaaSolution {
    bool feasible = true;
    /// False only for the generic solver when it gave up.
    bool converged = true;
    std::vector<double> x;
    double value = 0.0;
    double feasibility_residual = 0.0;
};

using SampleFunction = std::function<double(std::span<const double> x, std::span<const double> xi)>;
using SampleGradient =
    std::function<void(std::span<const double> x, std::span<const double> xi, std::span<double> grad)>;
using DecisionFunction = std::function<double(std::span<const double> x)>;

class StochasticProgram;
using WeightedSolver =
    std::function<WeightedSaaSolution(const StochasticProgram&, const SampleSet&, const ProbabilityWeights&)>;

/// Settings for the best-effort projected subgradient solver used by
/// user-defined programs. Theta is the box [lower, upper]; other
/// deterministic and stochastic constraints enter as exact penalties.
/// Missing gradients are replaced by central differences.
struct GenericSolverSettings {
    std::vector<double> start;
    std::vector<double> lower;
    std::vector<double> upper;
    SampleGradient objective_gradient;
    int iterations = 3000;
    int restarts = 5;
    double step_scale = 1.0;
    double step_offset = 10.0;
    double penalty = 100.0;
    std::uint64_t seed = 0;
};

/// min E[H(x; xi)] s.t. E[F_k(x; xi)] <= 0 (k < m), g_k(x) <= 0 (k < s).
/// Evaluators must be deterministic.
class StochasticProgram {
public:
    std::string name;
    std::size_t decision_dim = 1;  // p
    std::size_t data_dim = 1;      // d
    SampleFunction objective;
    std::vector<SampleFunction> stochastic_constraints;
    std::vector<DecisionFunction> deterministic_constraints;
    InnerSolverKind solver = InnerSolverKind::generic;
    /// Used for closed-form and LP-reducible programs.
    WeightedSolver weighted_solver;
    GenericSolverSettings generic;

    std::size_t p() const noexcept { return decision_dim; }
    std::size_t m() const noexcept { return stochastic_constraints.size(); }
    std::size_t s() const noexcept { return deterministic_constraints.size(); }

    /// Throws std::invalid_argument when the program is malformed.
    void validate() const;
};

/// H(x; xi) = (x - xi)^2.
StochasticProgram quadratic_problem();

/// H(x; xi) = x + (xi - x)^+ / (1 - alpha). Throws for alpha outside (0, 1).
StochasticProgram cvar_problem(double alpha);

/// Decision (x_1..x_d, c): H = c + (-xi'x - c)^+ / (1 - alpha) with
/// E[xi'x] >= r_b, sum x = 1, x >= 0.
StochasticProgram portfolio_problem(double alpha, double r_b, std::size_t assets = 2);

/// Dispatches on the program's solver kind. Infeasible weighted instances
/// come back with feasible == false; generic non-convergence sets
/// converged == false.
WeightedSaaSolution solve_weighted_saa(const StochasticProgram& program, const SampleSet& samples,
                                       const ProbabilityWeights& w);

/// Plain sample average approximation (uniform weights).
WeightedSaaSolution solve_saa(const StochasticProgram& program, const SampleSet& samples);

/// H(x; xi_i) for every row.
std::vector<double> objective_values(const StochasticProgram& program, const SampleSet& samples,
                                     std::span<const double> x);

/// sum w_i H(x; xi_i).
double weighted_objective(const StochasticProgram& program, const SampleSet& samples,
                          const ProbabilityWeights& w, std::span<const double> x);

/// Largest violation of the weighted stochastic and deterministic constraints at x.
double weighted_constraint_violation(const StochasticProgram& program, const SampleSet& samples,
                                     const ProbabilityWeights& w, std::span<const double> x);

/// Smallest data value whose cumulative sorted weight reaches alpha.
double weighted_quantile(std::span<const double> values, std::span<const double> weights, double alpha);

// ---------------------------------------------------------------------------
// Built-in problem configuration.

enum class ProblemKind { quadratic, cvar, portfolio };

std::string to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);

/// A built-in program plus the normal data-generating distribution used by
/// experiments. `cov` is row-major d x d.
struct ProblemSpec {
    ProblemKind kind = ProblemKind::quadratic;
    double alpha = 0.9;
    double r_b = 1.0;
    std::size_t dimension = 1;
    std::vector<double> mean;
    std::vector<double> cov;
};

/// Defaults: standard normal data for quadratic and cvar (alpha 0.9); two
/// assets with mean (0.8, 1.2), covariance diag(1, 4), r_b = 1, alpha = 0.9
/// for portfolio.
ProblemSpec default_problem_spec(ProblemKind kind);

/// Every inconsistency in the problem description (empty when usable).
std::vector<std::string> problem_spec_errors(const ProblemSpec& spec);

/// Throws std::invalid_argument when problem_spec_errors is not empty.
StochasticProgram make_program(const ProblemSpec& spec);

} // namespace elsaa
