#include "elsaa/elweights.hpp"

#include "elsaa/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace elsaa {

namespace {

// Scaled form of the stationarity condition. With a_i = (max c - c_i) / range
// and s = (mu - max c) / range, the weights are q_i / sum q with
// q_i = s / (s + a_i). The divergence -2 sum log(n w_i) decreases strictly in
// s, from +inf as s -> 0 to 0 as s -> inf, so the active constraint has a
// single root. We solve in u = log s.
struct ScaledDual {
    std::span<const double> gaps;  // a_i in [0, 1]
    std::vector<double> q;

    explicit ScaledDual(std::span<const double> a) : gaps(a), q(a.size()) {}

    // Divergence and its derivative in u at s = exp(u).
    std::pair<double, double> evaluate(double u) {
        const double s = std::exp(u);
        const double n = static_cast<double>(gaps.size());
        double sum_q = 0.0;
        double sum_q2 = 0.0;
        for (std::size_t i = 0; i < gaps.size(); ++i) {
            q[i] = 1.0 / (1.0 + gaps[i] / s);
            sum_q += q[i];
            sum_q2 += q[i] * q[i];
        }
        const double mean_q = sum_q / n;
        double div = 0.0;
        for (double qi : q) {
            const double ratio = qi / mean_q;
            const double e = ratio - 1.0;
            div -= std::abs(e) < 0.5 ? std::log1p(e) : std::log(ratio);
        }
        div *= 2.0;
        const double slope = 2.0 * (sum_q - n * sum_q2 / sum_q);
        return {div, slope};
    }
};

InnerSolution uniform_solution(std::span<const double> costs, double lambda, double mu) {
    InnerSolution out;
    out.weights = ProbabilityWeights::uniform(costs.size());
    out.value = out.weights.dot(costs);
    out.dual_lambda = lambda;
    out.dual_mu = mu;
    out.kkt_residual = 0.0;
    return out;
}

void check_inputs(std::span<const double> costs, const DivergenceBall& ball) {
    if (costs.size() < 2) throw std::invalid_argument("linear ball problem needs n >= 2");
    if (costs.size() != ball.n()) throw std::invalid_argument("cost length differs from ball size");
    for (double c : costs) {
        if (!std::isfinite(c)) throw std::invalid_argument("linear ball problem: non-finite cost");
    }
}

} // namespace

InnerSolution max_linear_over_ball(std::span<const double> costs, const DivergenceBall& ball) {
    check_inputs(costs, ball);
    const std::size_t n = costs.size();
    const auto [lo_it, hi_it] = std::minmax_element(costs.begin(), costs.end());
    const double cmax = *hi_it;
    const double range = cmax - *lo_it;
    double mean = 0.0;
    for (double c : costs) mean += c;
    mean /= static_cast<double>(n);

    const double tau = ball.threshold();
    if (range < 1e-12 * (1.0 + std::abs(mean))) return uniform_solution(costs, 0.0, cmax);
    if (tau == 0.0) {
        return uniform_solution(costs, std::numeric_limits<double>::infinity(),
                                std::numeric_limits<double>::infinity());
    }

    std::vector<double> gaps(n);
    for (std::size_t i = 0; i < n; ++i) gaps[i] = (cmax - costs[i]) / range;
    ScaledDual dual(gaps);

    // Bracket the root in u: div(u_lo) > tau >= div(u_hi).
    double u = 0.0;
    auto [div, slope] = dual.evaluate(u);
    double u_lo = -std::numeric_limits<double>::infinity();
    double u_hi = std::numeric_limits<double>::infinity();
    if (div > tau) {
        u_lo = u;
        for (double step = 2.0; u_hi == std::numeric_limits<double>::infinity(); step *= 2.0) {
            const double trial = u_lo + step;
            if (trial > 690.0) throw SolverError("max_linear_over_ball: could not bracket dual root");
            if (dual.evaluate(trial).first <= tau) {
                u_hi = trial;
            } else {
                u_lo = trial;
            }
        }
    } else {
        u_hi = u;
        for (double step = 2.0; u_lo == -std::numeric_limits<double>::infinity(); step *= 2.0) {
            const double trial = u_hi - step;
            if (trial < -690.0) throw SolverError("max_linear_over_ball: could not bracket dual root");
            if (dual.evaluate(trial).first > tau) {
                u_lo = trial;
            } else {
                u_hi = trial;
            }
        }
    }

    // Safeguarded Newton on f(u) = div(u) - tau.
    const double tol = 1e-12 * std::max(1.0, tau);
    u = 0.5 * (u_lo + u_hi);
    int iterations = 0;
    bool converged = false;
    for (; iterations < 300; ++iterations) {
        std::tie(div, slope) = dual.evaluate(u);
        const double f = div - tau;
        if (f > 0.0) {
            u_lo = u;
        } else {
            u_hi = u;
        }
        if (std::abs(f) <= tol) {
            converged = true;
            break;
        }
        double next = slope < 0.0 ? u - f / slope : std::numeric_limits<double>::quiet_NaN();
        if (!(next > u_lo && next < u_hi)) next = 0.5 * (u_lo + u_hi);
        if (next == u || u_hi - u_lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(u))) {
            // Interval exhausted at machine precision; settle on the feasible end.
            u = u_hi;
            std::tie(div, slope) = dual.evaluate(u);
            converged = std::abs(div - tau) <= 1e-9 * std::max(1.0, tau);
            break;
        }
        u = next;
    }

    double sum_q = 0.0;
    for (double qi : dual.q) sum_q += qi;
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = dual.q[i] / sum_q;

    InnerSolution out;
    out.weights = ProbabilityWeights(std::move(w));
    out.value = out.weights.dot(costs);
    const double s = std::exp(u);
    out.dual_mu = cmax + s * range;
    out.dual_lambda = range * s / (2.0 * sum_q);
    double total = 0.0;
    for (double v : out.weights.values()) total += v;
    out.kkt_residual = std::max(std::abs(burg_statistic(out.weights) - tau), std::abs(total - 1.0));
    out.iterations = iterations;
    if (!converged || !(out.kkt_residual <= 1e-7)) {
        throw SolverError("max_linear_over_ball: dual root find did not converge (residual " +
                          std::to_string(out.kkt_residual) + ")");
    }
    return out;
}

InnerSolution min_linear_over_ball(std::span<const double> costs, const DivergenceBall& ball) {
    check_inputs(costs, ball);
    std::vector<double> negated(costs.begin(), costs.end());
    for (double& c : negated) c = -c;
    InnerSolution out = max_linear_over_ball(negated, ball);
    out.value = out.weights.dot(costs);
    return out;
}

} // namespace elsaa
