#include "elsaa/lp.hpp"

#include "elsaa/error.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace elsaa {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-10;

// How an original variable maps onto nonnegative standard-form columns.
struct ColumnMap {
    enum Kind { shifted, flipped, split } kind;
    std::size_t column;  // y (or y+ for split)
    double offset;       // l for shifted, u for flipped
};

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t structural)
        : m_(rows), n_(structural), width_(structural + rows + 1),
          t_(rows * width_, 0.0), cost_(width_, 0.0), basis_(rows) {
        for (std::size_t i = 0; i < m_; ++i) {
            at(i, n_ + i) = 1.0;
            basis_[i] = n_ + i;
        }
    }

    double& at(std::size_t i, std::size_t j) { return t_[i * width_ + j]; }
    double at(std::size_t i, std::size_t j) const { return t_[i * width_ + j]; }
    double& rhs(std::size_t i) { return t_[i * width_ + width_ - 1]; }
    double rhs(std::size_t i) const { return t_[i * width_ + width_ - 1]; }
    std::size_t rows() const { return m_; }
    std::size_t structural() const { return n_; }
    bool artificial(std::size_t j) const { return j >= n_ && j < n_ + m_; }
    std::vector<std::size_t>& basis() { return basis_; }
    std::vector<double>& cost() { return cost_; }

    // Reduced costs for column costs c (artificial columns and rhs excluded from c).
    void price(const std::vector<double>& c) {
        std::fill(cost_.begin(), cost_.end(), 0.0);
        for (std::size_t j = 0; j < n_; ++j) cost_[j] = c[j];
        for (std::size_t i = 0; i < m_; ++i) {
            const std::size_t b = basis_[i];
            const double cb = b < n_ ? c[b] : 0.0;
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j < width_; ++j) cost_[j] -= cb * at(i, j);
        }
    }

    void pivot(std::size_t r, std::size_t k) {
        const double p = at(r, k);
        for (std::size_t j = 0; j < width_; ++j) at(r, j) /= p;
        at(r, k) = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) continue;
            const double f = at(i, k);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < width_; ++j) at(i, j) -= f * at(r, j);
            at(i, k) = 0.0;
        }
        const double f = cost_[k];
        if (f != 0.0) {
            for (std::size_t j = 0; j < width_; ++j) cost_[j] -= f * at(r, j);
            cost_[k] = 0.0;
        }
        basis_[r] = k;
    }

    enum class Outcome { optimal, unbounded, capped };

    // Bland's rule: lowest-index improving column, ratio ties to lowest basic index.
    Outcome run(bool allow_artificial, int& iterations, int cap) {
        while (true) {
            std::size_t enter = width_;
            for (std::size_t j = 0; j + 1 < width_; ++j) {
                if (!allow_artificial && artificial(j)) continue;
                if (cost_[j] < -kCostTol) {
                    enter = j;
                    break;
                }
            }
            if (enter == width_) return Outcome::optimal;
            if (iterations >= cap) return Outcome::capped;

            std::size_t leave = m_;
            double best = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                const double a = at(i, enter);
                if (a <= kPivotTol) continue;
                const double ratio = std::max(rhs(i), 0.0) / a;
                const double slack = 1e-12 * (1.0 + best);
                if (leave == m_ || ratio < best - slack) {
                    leave = i;
                    best = ratio;
                } else if (ratio <= best + slack && basis_[i] < basis_[leave]) {
                    leave = i;
                    best = std::min(best, ratio);
                }
            }
            if (leave == m_) return Outcome::unbounded;
            pivot(leave, enter);
            ++iterations;
        }
    }

private:
    std::size_t m_;
    std::size_t n_;
    std::size_t width_;
    std::vector<double> t_;
    std::vector<double> cost_;
    std::vector<std::size_t> basis_;
};

void validate(const LinearProgram& lp) {
    const std::size_t n = lp.variables();
    if (n == 0) throw std::invalid_argument("solve_lp: no variables");
    auto finite_row = [n](const std::vector<double>& row) {
        if (row.size() != n) throw std::invalid_argument("solve_lp: row length differs from variable count");
        for (double v : row) {
            if (!std::isfinite(v)) throw std::invalid_argument("solve_lp: non-finite coefficient");
        }
    };
    finite_row(lp.objective);
    if (lp.inequality_rows.size() != lp.inequality_rhs.size() ||
        lp.equality_rows.size() != lp.equality_rhs.size()) {
        throw std::invalid_argument("solve_lp: row and right-hand-side counts differ");
    }
    for (const auto& r : lp.inequality_rows) finite_row(r);
    for (const auto& r : lp.equality_rows) finite_row(r);
    for (double v : lp.inequality_rhs) {
        if (!std::isfinite(v)) throw std::invalid_argument("solve_lp: non-finite right-hand side");
    }
    for (double v : lp.equality_rhs) {
        if (!std::isfinite(v)) throw std::invalid_argument("solve_lp: non-finite right-hand side");
    }
    if ((!lp.lower.empty() && lp.lower.size() != n) || (!lp.upper.empty() && lp.upper.size() != n)) {
        throw std::invalid_argument("solve_lp: bound vectors must match the variable count");
    }
    for (std::size_t j = 0; j < n; ++j) {
        const double lo = lp.lower.empty() ? 0.0 : lp.lower[j];
        const double hi = lp.upper.empty() ? kInf : lp.upper[j];
        if (std::isnan(lo) || std::isnan(hi) || lo == kInf || hi == -kInf) {
            throw std::invalid_argument("solve_lp: invalid bound");
        }
    }
}

} // namespace

LpResult solve_lp(const LinearProgram& lp, int max_iterations) {
    validate(lp);
    const std::size_t n = lp.variables();
    LpResult result;

    // Empty feasible box short-circuits to infeasible.
    for (std::size_t j = 0; j < n; ++j) {
        const double lo = lp.lower.empty() ? 0.0 : lp.lower[j];
        const double hi = lp.upper.empty() ? kInf : lp.upper[j];
        if (lo > hi) return result;
    }

    // Standard form: original x in terms of nonnegative columns y.
    std::vector<ColumnMap> maps(n);
    std::size_t ycols = 0;
    std::vector<std::size_t> bounded;  // variables needing a y <= u - l row
    for (std::size_t j = 0; j < n; ++j) {
        const double lo = lp.lower.empty() ? 0.0 : lp.lower[j];
        const double hi = lp.upper.empty() ? kInf : lp.upper[j];
        if (std::isfinite(lo)) {
            maps[j] = {ColumnMap::shifted, ycols++, lo};
            if (std::isfinite(hi)) bounded.push_back(j);
        } else if (std::isfinite(hi)) {
            maps[j] = {ColumnMap::flipped, ycols++, hi};
        } else {
            maps[j] = {ColumnMap::split, ycols, 0.0};
            ycols += 2;
        }
    }

    const std::size_t ineq = lp.inequality_rows.size() + bounded.size();
    const std::size_t rows = ineq + lp.equality_rows.size();
    const std::size_t structural = ycols + ineq;  // y then slacks

    std::vector<double> c(structural, 0.0);
    double offset = 0.0;
    auto expand = [&](const std::vector<double>& coeffs, std::vector<double>& out, double& constant) {
        for (std::size_t j = 0; j < n; ++j) {
            const double a = coeffs[j];
            if (a == 0.0) continue;
            const ColumnMap& m = maps[j];
            switch (m.kind) {
            case ColumnMap::shifted:
                out[m.column] += a;
                constant += a * m.offset;
                break;
            case ColumnMap::flipped:
                out[m.column] -= a;
                constant += a * m.offset;
                break;
            case ColumnMap::split:
                out[m.column] += a;
                out[m.column + 1] -= a;
                break;
            }
        }
    };
    expand(lp.objective, c, offset);

    Tableau tab(rows, structural);
    std::vector<std::vector<double>> std_rows(rows, std::vector<double>(structural, 0.0));
    std::vector<double> std_rhs(rows, 0.0);
    std::size_t r = 0;
    for (std::size_t i = 0; i < lp.inequality_rows.size(); ++i, ++r) {
        double constant = 0.0;
        expand(lp.inequality_rows[i], std_rows[r], constant);
        std_rows[r][ycols + r] = 1.0;
        std_rhs[r] = lp.inequality_rhs[i] - constant;
    }
    for (std::size_t j : bounded) {
        std_rows[r][maps[j].column] = 1.0;
        std_rows[r][ycols + r] = 1.0;
        std_rhs[r] = lp.upper[j] - lp.lower[j];
        ++r;
    }
    for (std::size_t i = 0; i < lp.equality_rows.size(); ++i, ++r) {
        double constant = 0.0;
        expand(lp.equality_rows[i], std_rows[r], constant);
        std_rhs[r] = lp.equality_rhs[i] - constant;
    }
    for (std::size_t i = 0; i < rows; ++i) {
        if (std_rhs[i] < 0.0) {
            for (double& v : std_rows[i]) v = -v;
            std_rhs[i] = -std_rhs[i];
        }
        for (std::size_t j = 0; j < structural; ++j) tab.at(i, j) = std_rows[i][j];
        tab.rhs(i) = std_rhs[i];
    }

    const int cap = max_iterations > 0 ? max_iterations
                                       : static_cast<int>(50 * (rows + structural) + 1000);
    int iterations = 0;
    auto capped = [&](const char* phase) {
        std::string basis;
        for (std::size_t b : tab.basis()) basis += (basis.empty() ? "" : ",") + std::to_string(b);
        throw SolverError(std::string("solve_lp: pivot cap reached in ") + phase + " after " +
                          std::to_string(iterations) + " pivots; basis [" + basis + "]");
    };

    // Phase 1: minimize the sum of artificials.
    double scale = 1.0;
    for (double b : std_rhs) scale = std::max(scale, std::abs(b));
    {
        auto& cost = tab.cost();
        std::fill(cost.begin(), cost.end(), 0.0);
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < structural; ++j) cost[j] -= tab.at(i, j);
            cost.back() -= tab.rhs(i);
        }
        if (tab.run(true, iterations, cap) == Tableau::Outcome::capped) capped("phase 1");
        double infeasibility = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
            if (tab.artificial(tab.basis()[i])) infeasibility += std::max(tab.rhs(i), 0.0);
        }
        if (infeasibility > 1e-9 * scale) {
            result.status = LpStatus::infeasible;
            result.iterations = iterations;
            return result;
        }
        // Drive remaining artificials out of the basis where possible.
        for (std::size_t i = 0; i < rows; ++i) {
            if (!tab.artificial(tab.basis()[i])) continue;
            std::size_t best = structural;
            double mag = kPivotTol;
            for (std::size_t j = 0; j < structural; ++j) {
                if (std::abs(tab.at(i, j)) > mag) {
                    mag = std::abs(tab.at(i, j));
                    best = j;
                }
            }
            if (best < structural) tab.pivot(i, best);
        }
    }

    // Phase 2.
    tab.price(c);
    const auto outcome = tab.run(false, iterations, cap);
    if (outcome == Tableau::Outcome::capped) capped("phase 2");
    result.iterations = iterations;
    if (outcome == Tableau::Outcome::unbounded) {
        result.status = LpStatus::unbounded;
        return result;
    }

    std::vector<double> y(structural, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        const std::size_t b = tab.basis()[i];
        if (b < structural) y[b] = std::max(tab.rhs(i), 0.0);
    }
    result.status = LpStatus::optimal;
    result.x.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const ColumnMap& m = maps[j];
        switch (m.kind) {
        case ColumnMap::shifted: result.x[j] = m.offset + y[m.column]; break;
        case ColumnMap::flipped: result.x[j] = m.offset - y[m.column]; break;
        case ColumnMap::split: result.x[j] = y[m.column] - y[m.column + 1]; break;
        }
    }
    result.value = 0.0;
    for (std::size_t j = 0; j < n; ++j) result.value += lp.objective[j] * result.x[j];

    // Duals from the final basis: the artificial block holds B^-1, so
    // pi_i = -reduced cost of artificial column i.
    std::vector<double> pi(rows);
    for (std::size_t i = 0; i < rows; ++i) pi[i] = -tab.cost()[structural + i];
    double dual = offset;
    for (std::size_t i = 0; i < rows; ++i) dual += pi[i] * std_rhs[i];
    result.dual_value = dual;
    double dual_inf = 0.0;
    for (std::size_t j = 0; j < structural; ++j) {
        double v = -c[j];
        for (std::size_t i = 0; i < rows; ++i) v += pi[i] * std_rows[i][j];
        dual_inf = std::max(dual_inf, v);
    }
    result.dual_infeasibility = dual_inf;

    double residual = 0.0;
    auto row_value = [&](const std::vector<double>& row) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += row[j] * result.x[j];
        return s;
    };
    for (std::size_t i = 0; i < lp.inequality_rows.size(); ++i) {
        residual = std::max(residual, row_value(lp.inequality_rows[i]) - lp.inequality_rhs[i]);
    }
    for (std::size_t i = 0; i < lp.equality_rows.size(); ++i) {
        residual = std::max(residual, std::abs(row_value(lp.equality_rows[i]) - lp.equality_rhs[i]));
    }
    for (std::size_t j = 0; j < n; ++j) {
        const double lo = lp.lower.empty() ? 0.0 : lp.lower[j];
        const double hi = lp.upper.empty() ? kInf : lp.upper[j];
        residual = std::max({residual, lo - result.x[j], result.x[j] - hi});
    }
    result.primal_residual = residual;
    return result;
}

} // namespace elsaa
