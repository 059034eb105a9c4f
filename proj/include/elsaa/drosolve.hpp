#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "elsaa/divergence.hpp"
#include "elsaa/problems.hpp"
#include "elsaa/sample_set.hpp"

namespace elsaa {

struct DroOptions {
    int max_cut_iterations = 200;
    /// Relative certificate gap at which the cutting-plane loop stops.
    double cut_tolerance = 1e-6;
    int restarts = 10;
    /// Seeds the random restarts of the min side.
    std::uint64_t seed = 0;
    int max_alternations = 500;
    double alternation_tolerance = 1e-8;
};

/// Outcome of one side of the pair.
struct DroSide {
    double value = 0.0;
    ProbabilityWeights weights = ProbabilityWeights::uniform(1);
    /// Inner minimizer at `weights`.
    std::vector<double> x;
    int iterations = 0;
    /// Max side: smallest master bound seen. With stochastic constraints it
    /// only bounds weights at which every visited solution stays feasible,
    /// a region that need not contain `weights`. Min side: equals `value`.
    double bound = 0.0;
    bool converged = true;
    /// Min side only: best value of every restart, in restart order.
    std::vector<double> restart_values;
    int best_restart = 0;
    /// Number of weighted inner problems the generic solver gave up on.
    int inner_failures = 0;
};

struct DroDiagnostics {
    int max_side_iterations = 0;
    double max_side_gap = 0.0;
    bool max_side_converged = true;
    int min_side_alternations = 0;
    int restarts = 0;
    std::vector<double> restart_values;
    /// Largest minus smallest restart value.
    double restart_dispersion = 0.0;
    int inner_failures = 0;
};

struct DroBounds {
    double lower = 0.0;
    double upper = 0.0;
    ProbabilityWeights lower_weights = ProbabilityWeights::uniform(1);
    ProbabilityWeights upper_weights = ProbabilityWeights::uniform(1);
    std::vector<double> lower_x;
    std::vector<double> upper_x;
    DroDiagnostics diagnostics;
};

/// max over the ball of min_x sum w_i (H(x; xi_i) - shift_i), by Kelley's
/// cutting planes started from uniform weights. `shift` may be empty.
/// With stochastic constraints every cut's solution x_j is kept feasible by
/// sum w_i F_k(x_j; xi_i) <= 0 in the master, and weights whose inner problem
/// is still infeasible are cut off the same way at the incumbent. The search
/// is then local and the result need not grow with the threshold.
/// Throws std::invalid_argument for n < 2 or mismatched sizes and SolverError
/// when the sample problem is infeasible at uniform weights.
DroSide maximize_minvalue(const StochasticProgram& program, const SampleSet& samples, const DivergenceBall& ball,
                          const DroOptions& options = {}, std::span<const double> shift = {});

/// min over the ball of the same value function by alternating minimization
/// with random restarts. The result is attained by the returned weights, so
/// it bounds the true minimum from above; there is no global guarantee.
DroSide minimize_minvalue(const StochasticProgram& program, const SampleSet& samples, const DivergenceBall& ball,
                          const DroOptions& options = {}, std::span<const double> shift = {});

DroBounds dro_bounds(const StochasticProgram& program, const SampleSet& samples, const DivergenceBall& ball,
                     const DroOptions& options = {});

/// Bounds on max_x sum w_i (H(x_hat; xi_i) - H(x; xi_i)) over the ball.
/// x_hat must not depend on `samples`.
DroBounds gap_bounds(const StochasticProgram& program, const SampleSet& samples, const DivergenceBall& ball,
                     std::span<const double> x_hat, const DroOptions& options = {});

// ---------------------------------------------------------------------------
// Master problem of the cutting-plane method.

/// max_w min_j cuts[j]'w over the ball subject to constraints[l]'w <= 0.
struct CutMasterResult {
    /// Dual objective: an upper bound on the master optimum for any
    /// multipliers, and equal to it at convergence.
    double bound = 0.0;
    /// min_j cuts[j]'w at the returned weights.
    double value = 0.0;
    /// max_l constraints[l]'w (zero when there are none).
    double violation = 0.0;
    ProbabilityWeights weights = ProbabilityWeights::uniform(1);
    std::vector<double> cut_multipliers;
    std::vector<double> constraint_multipliers;
    int iterations = 0;
    bool converged = false;
};

/// Solved through the dual min over theta in the simplex and eta >= 0 of
/// V(sum theta_j c_j - sum eta_l a_l), where V(g) = max_{w in ball} g'w,
/// smoothed by eps * sum log(n w_i) so that the weights are recoverable when
/// the optimal aggregate is constant. With eps = 1e-7 (1 + max |row entry|) /
/// max(1, tau), `bound - value` at convergence is at most
/// 1e-9 (1 + |bound|) + eps * tau, and `violation` at most
/// 1e-7 (1 + max |row entry|).
/// Optional warm-start multipliers may be shorter than the cut lists; missing
/// entries start at zero. Throws SolverError when the constraints exclude the
/// whole ball.
CutMasterResult solve_cut_master(const std::vector<std::vector<double>>& cuts,
                                 const std::vector<std::vector<double>>& constraints, const DivergenceBall& ball,
                                 std::span<const double> warm_cut_multipliers = {},
                                 std::span<const double> warm_constraint_multipliers = {});

/// Hessian of V at g, row-major n x n. Requires a nonconstant g and a
/// positive threshold.
std::vector<double> ball_value_hessian(std::span<const double> g, const DivergenceBall& ball);

} // namespace elsaa
