#pragma once

#include <optional>
#include <span>
#include <string>

#include "elsaa/drosolve.hpp"
#include "elsaa/problems.hpp"
#include "elsaa/sample_set.hpp"

namespace elsaa {

enum class CiMethod { el, clt, clt2, srp };

std::string to_string(CiMethod method);
/// Accepts el, clt, clt2 and srp in any letter case.
CiMethod ci_method_from_string(const std::string& name);

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 0.0;
    double beta = 0.05;
    CiMethod method = CiMethod::el;
    /// Chi-square degrees of freedom for EL intervals.
    std::optional<int> df_used;
    /// Zero sample variance collapsed a normal-theory interval to a point.
    bool degenerate = false;
    /// Present for EL intervals.
    std::optional<DroDiagnostics> diagnostics;
};

/// p + 1 without stochastic constraints, p + m + 1 with them.
int el_degrees_of_freedom(const StochasticProgram& program);

/// [min-min, max-min] over the ball calibrated at level beta.
ConfidenceInterval el_ci_optimal_value(const StochasticProgram& program, const SampleSet& samples, double beta,
                                       const DroOptions& options = {});

/// Interval for h(x_hat) - z*. x_hat must not depend on `samples`.
ConfidenceInterval el_ci_gap(const StochasticProgram& program, const SampleSet& samples,
                             std::span<const double> x_hat, double beta, const DroOptions& options = {});

/// z_n +/- z_{1-beta/2} s / sqrt(n), with s the 1/(n-1) standard deviation
/// of H(x_n; xi_i) at the SAA solution.
ConfidenceInterval clt_ci(const StochasticProgram& program, const SampleSet& samples, double beta);

/// Lower end from the SAA on the first ceil(n/2) rows, upper end from
/// evaluating that solution on the remaining rows. Needs n >= 4.
ConfidenceInterval clt2_ci(const StochasticProgram& program, const SampleSet& samples, double beta);

/// One-sided single replication interval [0, G + z_{1-beta} s / sqrt(n)] where
/// G is the mean of H(x_hat; xi_i) - H(x_n; xi_i) and s the 1/(n-1) standard
/// deviation of those differences. The upper end is clamped at zero.
ConfidenceInterval srp_gap_ci(const StochasticProgram& program, const SampleSet& samples,
                              std::span<const double> x_hat, double beta);

} // namespace elsaa
