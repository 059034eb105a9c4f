#pragma once

// Brute-force reference computations used only by the tests. None of them
// calls into the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace oracle {

// Regularized lower incomplete gamma P(a, x) by its power series
// x^a e^-x / Gamma(a+1) * sum_k x^k / ((a+1)...(a+k)).
inline double gamma_p_series(double a, double x) {
    if (x <= 0.0) return 0.0;
    long double term = 1.0L;
    long double sum = 1.0L;
    for (int k = 1; k < 100000; ++k) {
        term *= static_cast<long double>(x) / (a + k);
        sum += term;
        if (term < 1e-22L * sum) break;
    }
    const long double log_prefix = a * std::log(static_cast<long double>(x)) - x - std::lgamma(a + 1.0);
    return static_cast<double>(sum * std::exp(log_prefix));
}

inline double chi2_cdf(int df, double q) { return gamma_p_series(0.5 * df, 0.5 * q); }

// Standard normal CDF by composite Simpson integration of the density.
inline double normal_cdf(double x) {
    const int steps = 20000;
    const double a = 0.0;
    const double h = (x - a) / steps;
    auto pdf = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); };
    double s = pdf(a) + pdf(x);
    for (int k = 1; k < steps; ++k) s += (k % 2 ? 4.0 : 2.0) * pdf(a + k * h);
    return 0.5 + s * h / 3.0;
}

inline double burg(const std::vector<double>& w) {
    double s = 0.0;
    for (double v : w) {
        if (v <= 0.0) return std::numeric_limits<double>::infinity();
        s += std::log(static_cast<double>(w.size()) * v);
    }
    return -2.0 * s;
}

// Maximum of f over {w in simplex(3) : burg(w) <= tau}. Points are written
// as w = 1/3 + r t d(theta) with d a unit direction in the simplex plane, r
// the boundary radius along d (found by bisection) and t in [0, 1], so the
// boundary t = 1 lies exactly on the grid. A 720 x 101 grid in (theta, t) is
// followed by six rounds of 41 x 41 refinement around the incumbent.
inline double simplex3_max(const std::function<double(const std::vector<double>&)>& f, double tau) {
    const double e1[3] = {1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0), 0.0};
    const double e2[3] = {1.0 / std::sqrt(6.0), 1.0 / std::sqrt(6.0), -2.0 / std::sqrt(6.0)};
    auto point = [&](double theta, double r) {
        std::vector<double> w(3);
        for (int i = 0; i < 3; ++i) w[i] = 1.0 / 3.0 + r * (std::cos(theta) * e1[i] + std::sin(theta) * e2[i]);
        return w;
    };
    auto radius = [&](double theta) {
        double lo = 0.0;
        double hi = 1.0;
        for (int k = 0; k < 80; ++k) {
            const double mid = 0.5 * (lo + hi);
            if (burg(point(theta, mid)) <= tau) lo = mid;
            else hi = mid;
        }
        return lo;
    };
    double best = -std::numeric_limits<double>::infinity();
    double best_theta = 0.0;
    double best_t = 0.0;
    auto visit = [&](double theta, double r, double t) {
        t = std::clamp(t, 0.0, 1.0);
        const double v = f(point(theta, t * r));
        if (v > best) {
            best = v;
            best_theta = theta;
            best_t = t;
        }
    };
    double dtheta = 2.0 * M_PI / 720.0;
    double dt = 0.01;
    for (int i = 0; i < 720; ++i) {
        const double r = radius(i * dtheta);
        for (int j = 0; j <= 100; ++j) visit(i * dtheta, r, j * dt);
    }
    for (int round = 0; round < 6; ++round) {
        const double theta0 = best_theta;
        const double t0 = best_t;
        dtheta /= 10.0;
        dt /= 10.0;
        for (int i = -20; i <= 20; ++i) {
            const double r = radius(theta0 + i * dtheta);
            for (int j = -20; j <= 20; ++j) visit(theta0 + i * dtheta, r, t0 + j * dt);
        }
    }
    return best;
}

inline double simplex3_min(const std::function<double(const std::vector<double>&)>& f, double tau) {
    return -simplex3_max([&](const std::vector<double>& w) { return -f(w); }, tau);
}

// Weighted variance: the optimal value of min_x sum w_i (x - xi_i)^2.
inline double weighted_variance(const std::vector<double>& w, const std::vector<double>& xi) {
    double m = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) m += w[i] * xi[i];
    double v = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) v += w[i] * (xi[i] - m) * (xi[i] - m);
    return v;
}

// Solves the k x k system M y = r by Gaussian elimination with partial
// pivoting; nullopt when singular.
inline std::optional<std::vector<double>> solve_dense(std::vector<std::vector<double>> M, std::vector<double> r) {
    const std::size_t k = r.size();
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t piv = col;
        for (std::size_t row = col + 1; row < k; ++row) {
            if (std::abs(M[row][col]) > std::abs(M[piv][col])) piv = row;
        }
        if (std::abs(M[piv][col]) < 1e-11) return std::nullopt;
        std::swap(M[piv], M[col]);
        std::swap(r[piv], r[col]);
        for (std::size_t row = col + 1; row < k; ++row) {
            const double f = M[row][col] / M[col][col];
            for (std::size_t c = col; c < k; ++c) M[row][c] -= f * M[col][c];
            r[row] -= f * r[col];
        }
    }
    std::vector<double> y(k);
    for (std::size_t i = k; i-- > 0;) {
        double s = r[i];
        for (std::size_t c = i + 1; c < k; ++c) s -= M[i][c] * y[c];
        y[i] = s / M[i][i];
    }
    return y;
}

struct VertexResult {
    bool feasible = false;
    double value = 0.0;
};

// min c'x s.t. A x <= b, x >= 0 by enumerating every basic solution: pick v
// of the rows of [A; -I] as equalities, solve, keep the feasible ones. Needs
// a bounded feasible region.
inline VertexResult enumerate_vertices(const std::vector<double>& c, const std::vector<std::vector<double>>& A,
                                       const std::vector<double>& b) {
    const std::size_t v = c.size();
    const std::size_t m = A.size();
    std::vector<std::vector<double>> rows = A;
    std::vector<double> rhs = b;
    for (std::size_t j = 0; j < v; ++j) {
        std::vector<double> e(v, 0.0);
        e[j] = -1.0;
        rows.push_back(e);
        rhs.push_back(0.0);
    }
    const std::size_t total = m + v;
    VertexResult best;
    std::vector<std::size_t> pick(v);
    std::function<void(std::size_t, std::size_t)> choose = [&](std::size_t start, std::size_t depth) {
        if (depth == v) {
            std::vector<std::vector<double>> M;
            std::vector<double> r;
            for (std::size_t k : pick) {
                M.push_back(rows[k]);
                r.push_back(rhs[k]);
            }
            const auto x = solve_dense(M, r);
            if (!x) return;
            for (std::size_t k = 0; k < total; ++k) {
                double s = 0.0;
                for (std::size_t j = 0; j < v; ++j) s += rows[k][j] * (*x)[j];
                if (s > rhs[k] + 1e-9) return;
            }
            double val = 0.0;
            for (std::size_t j = 0; j < v; ++j) val += c[j] * (*x)[j];
            if (!best.feasible || val < best.value) {
                best.feasible = true;
                best.value = val;
            }
            return;
        }
        for (std::size_t k = start; k < total; ++k) {
            pick[depth] = k;
            choose(k + 1, depth + 1);
        }
    };
    choose(0, 0);
    return best;
}

} // namespace oracle
