#pragma once

#include <span>

#include "elsaa/divergence.hpp"

namespace elsaa {

/// Optimizer of a linear function over a divergence ball.
///
/// At an interior optimum the weights satisfy w_i = 2 * lambda / (mu - c_i)
/// with the divergence constraint active. For the minimizing side `mu` is
/// reported for the negated costs.
struct InnerSolution {
    double value = 0.0;
    ProbabilityWeights weights = ProbabilityWeights::uniform(1);
    double dual_lambda = 0.0;
    double dual_mu = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0;
};

/// max sum w_i c_i over the ball. Throws std::invalid_argument for n < 2,
/// mismatched sizes, or non-finite costs, and SolverError when the dual root
/// find fails to converge.
InnerSolution max_linear_over_ball(std::span<const double> costs, const DivergenceBall& ball);

/// min sum w_i c_i over the ball.
InnerSolution min_linear_over_ball(std::span<const double> costs, const DivergenceBall& ball);

} // namespace elsaa
