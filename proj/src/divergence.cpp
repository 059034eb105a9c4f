#include "elsaa/divergence.hpp"

#include "elsaa/stats.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace elsaa {

ProbabilityWeights::ProbabilityWeights(std::vector<double> w) : w_(std::move(w)) {
    if (w_.empty()) throw std::invalid_argument("ProbabilityWeights: empty vector");
    double sum = 0.0;
    for (double v : w_) {
        if (!std::isfinite(v) || v < 0.0) {
            throw std::invalid_argument("ProbabilityWeights: entries must be finite and nonnegative");
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-10) {
        throw std::invalid_argument("ProbabilityWeights: entries sum to " + std::to_string(sum));
    }
}

ProbabilityWeights ProbabilityWeights::uniform(std::size_t n) {
    if (n == 0) throw std::invalid_argument("ProbabilityWeights::uniform: n must be positive");
    return ProbabilityWeights(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

ProbabilityWeights ProbabilityWeights::normalized(std::vector<double> w) {
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    if (!(sum > 0.0) || !std::isfinite(sum)) {
        throw std::invalid_argument("ProbabilityWeights::normalized: sum must be positive");
    }
    for (double& v : w) v /= sum;
    return ProbabilityWeights(std::move(w));
}

double ProbabilityWeights::dot(std::span<const double> c) const {
    if (c.size() != w_.size()) throw std::invalid_argument("ProbabilityWeights::dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < w_.size(); ++i) s += w_[i] * c[i];
    return s;
}

DivergenceBall DivergenceBall::calibrated(int df, double beta, std::size_t n) {
    return {df, beta, stats::chi2_quantile(df, beta), n};
}

DivergenceBall DivergenceBall::with_threshold(double threshold, std::size_t n) {
    if (!(threshold >= 0.0) || !std::isfinite(threshold)) {
        throw std::invalid_argument("DivergenceBall: threshold must be finite and nonnegative");
    }
    return {0, 0.0, threshold, n};
}

namespace {

// -sum log(n w_i), +inf on zero entries.
double neg_log_ratio_sum(const ProbabilityWeights& w) {
    const double n = static_cast<double>(w.size());
    double s = 0.0;
    for (double v : w.values()) {
        if (v <= 0.0) return std::numeric_limits<double>::infinity();
        const double e = n * v - 1.0;
        s -= std::abs(e) < 0.5 ? std::log1p(e) : std::log(n * v);
    }
    return s;
}

} // namespace

double burg_statistic(const ProbabilityWeights& w) { return 2.0 * neg_log_ratio_sum(w); }

BallMembership ball_contains(const ProbabilityWeights& w, const DivergenceBall& ball) {
    if (w.size() != ball.n()) throw std::invalid_argument("ball_contains: weight length differs from ball size");
    const double stat = burg_statistic(w);
    const double slack = ball.threshold() - stat;
    return {stat <= ball.threshold() + kBallTolerance, slack};
}

double pinsker_tv_bound(const ProbabilityWeights& w) {
    const double s = neg_log_ratio_sum(w);
    if (std::isinf(s)) return s;
    return std::sqrt(std::max(0.0, s) / (2.0 * static_cast<double>(w.size())));
}

double total_variation_from_uniform(const ProbabilityWeights& w) {
    const double u = 1.0 / static_cast<double>(w.size());
    double s = 0.0;
    for (double v : w.values()) s += std::abs(v - u);
    return 0.5 * s;
}

} // namespace elsaa
