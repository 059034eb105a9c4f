#include "elsaa/stats.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace elsaa::stats {

namespace {

// Bisection on a decreasing function f over [lo, hi] with f(lo) >= 0 >= f(hi).
template <typename F>
double bisect_decreasing(F&& f, double lo, double hi) {
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (f(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

} // namespace

double chi2_cdf(int df, double q) {
    if (df < 1) throw std::domain_error("chi2_cdf: df must be >= 1");
    if (q <= 0.0) return 0.0;
    return boost::math::gamma_p(0.5 * df, 0.5 * q);
}

double chi2_quantile(int df, double beta) {
    if (df < 1) throw std::domain_error("chi2_quantile: df must be >= 1");
    if (!(beta > 0.0 && beta < 1.0)) throw std::domain_error("chi2_quantile: beta must lie in (0, 1)");

    const double a = 0.5 * df;
    // Work on whichever tail is the smaller probability to keep relative accuracy.
    auto excess = [&](double q) {
        if (beta < 0.5) return boost::math::gamma_q(a, 0.5 * q) - beta;
        return (1.0 - beta) - boost::math::gamma_p(a, 0.5 * q);
    };
    double hi = df + 40.0 * std::sqrt(static_cast<double>(df));
    while (excess(hi) > 0.0) hi *= 2.0;
    return bisect_decreasing(excess, 0.0, hi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must lie in (0, 1)");
    if (p == 0.5) return 0.0;
    const double tail = std::min(p, 1.0 - p);
    // Upper tail 0.5 * erfc(z / sqrt 2) is decreasing in z >= 0.
    auto excess = [tail](double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2) - tail; };
    double hi = 8.0;
    while (excess(hi) > 0.0) hi *= 2.0;
    const double z = bisect_decreasing(excess, 0.0, hi);
    return p < 0.5 ? -z : z;
}

} // namespace elsaa::stats
