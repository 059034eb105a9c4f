#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace elsaa {

/// min objective' x  s.t.  A x <= b,  E x = f,  lower <= x <= upper.
/// Bounds may be infinite. Empty `lower`/`upper` mean 0 and +infinity.
struct LinearProgram {
    std::vector<double> objective;
    std::vector<std::vector<double>> inequality_rows;
    std::vector<double> inequality_rhs;
    std::vector<std::vector<double>> equality_rows;
    std::vector<double> equality_rhs;
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t variables() const noexcept { return objective.size(); }
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    /// Dual objective of the internal standard form, read off the final basis.
    double dual_value = 0.0;
    /// max(0, max_j (pi' A_j - c_j)) over the standard-form columns.
    double dual_infeasibility = 0.0;
    /// Largest violation of the original rows and bounds at x.
    double primal_residual = 0.0;
};

/// Two-phase dense tableau simplex with Bland's rule. Throws
/// std::invalid_argument for inconsistent dimensions or non-finite data and
/// SolverError when the pivot cap is reached.
LpResult solve_lp(const LinearProgram& lp, int max_iterations = 0);

} // namespace elsaa
