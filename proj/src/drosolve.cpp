#include "elsaa/drosolve.hpp"

#include "elsaa/elweights.hpp"
#include "elsaa/error.hpp"
#include "elsaa/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace elsaa {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Pieces of the Hessian of V at an interior maximizer w = 2 lambda / (mu - g).
// H = diag(w^2) / (2 lambda)
//   + [w (w^2)' + w^2 w' - S w w' - n w^2 (w^2)'] / (2 lambda (n S - 1)),
// with S = sum w_i^2, obtained by differentiating the stationarity condition
// under sum w = 1 and sum log w = const.
struct HessianFactors {
    std::vector<double> w;
    std::vector<double> w2;
    double diag_scale = 0.0;
    double low_rank_scale = 0.0;
    double S = 0.0;
    double n = 0.0;
    bool usable = false;
};

HessianFactors hessian_factors(const InnerSolution& sol) {
    HessianFactors f;
    f.w.assign(sol.weights.values().begin(), sol.weights.values().end());
    f.n = static_cast<double>(f.w.size());
    f.w2.resize(f.w.size());
    for (std::size_t i = 0; i < f.w.size(); ++i) {
        f.w2[i] = f.w[i] * f.w[i];
        f.S += f.w2[i];
    }
    const double lambda = sol.dual_lambda;
    const double excess = f.n * f.S - 1.0;
    if (lambda > 0.0 && std::isfinite(lambda) && excess > 0.0) {
        f.diag_scale = 1.0 / (2.0 * lambda);
        f.low_rank_scale = 1.0 / (2.0 * lambda * excess);
        f.usable = true;
    }
    return f;
}

// Maximizer of g'w + eps sum log(n w_i) over the ball. The stationarity
// condition keeps w_i proportional to 1 / (mu - g_i); without the ball
// constraint, mu solves sum eps / (mu - g_i) = 1, and otherwise the weights
// are those of max_linear_over_ball. The smoothing makes the maximizer unique
// at constant g, where the plain value function has a kink.
struct SmoothedMax {
    InnerSolution inner;
    double value = 0.0;     // g'w + eps * log_term
    double log_term = 0.0;  // sum log(n w_i), in [-tau / 2, 0]
    bool on_boundary = false;
};

SmoothedMax smoothed_ball_max(std::span<const double> g, const DivergenceBall& ball, double eps) {
    const std::size_t n = g.size();
    const double nd = static_cast<double>(n);
    const auto [lo_it, hi_it] = std::minmax_element(g.begin(), g.end());
    const double gmax = *hi_it;
    SmoothedMax out;
    std::vector<double> w(n, 1.0 / nd);
    if (gmax - *lo_it > 0.0) {
        // h(mu) = sum eps / (mu - g_i) - 1 is convex and decreasing, so
        // Newton from the left end of the bracket increases monotonically.
        double mu = gmax + eps;
        for (int k = 0; k < 200; ++k) {
            double h = -1.0;
            double dh = 0.0;
            for (double gi : g) {
                const double t = eps / (mu - gi);
                h += t;
                dh -= t / (mu - gi);
            }
            const double next = mu - h / dh;
            if (!(next > mu)) break;
            mu = next;
        }
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = eps / (mu - g[i]);
            total += w[i];
        }
        for (double& v : w) v /= total;
    }
    // When eps is below the spacing of doubles near max g the interior
    // branch cannot be represented; the ball is then far too wide for it anyway.
    const bool representable = std::all_of(w.begin(), w.end(), [](double v) { return std::isfinite(v) && v > 0.0; });
    if (representable && burg_statistic(ProbabilityWeights(w)) <= ball.threshold()) {
        ProbabilityWeights interior(std::move(w));
        out.inner.weights = interior;
        out.inner.value = interior.dot(g);
    } else {
        out.inner = max_linear_over_ball(g, ball);
        out.on_boundary = true;
    }
    for (double v : out.inner.weights.values()) out.log_term += std::log(nd * v);
    out.value = out.inner.value + eps * out.log_term;
    return out;
}

// Cost and constraint rows evaluated at a decision x.
struct SampleEvaluator {
    const StochasticProgram& program;
    const SampleSet& samples;
    std::span<const double> shift;

    std::vector<double> costs(std::span<const double> x) const {
        std::vector<double> c(samples.rows());
        for (std::size_t i = 0; i < c.size(); ++i) {
            c[i] = program.objective(x, samples.row(i)) - (shift.empty() ? 0.0 : shift[i]);
        }
        return c;
    }

    std::vector<std::vector<double>> constraint_rows(std::span<const double> x) const {
        std::vector<std::vector<double>> rows;
        for (const auto& f : program.stochastic_constraints) {
            std::vector<double> r(samples.rows());
            for (std::size_t i = 0; i < r.size(); ++i) r[i] = f(x, samples.row(i));
            rows.push_back(std::move(r));
        }
        return rows;
    }
};

void check_problem(const StochasticProgram& program, const SampleSet& samples, const DivergenceBall& ball,
                   std::span<const double> shift) {
    program.validate();
    if (samples.rows() < 2) {
        throw std::invalid_argument("DRO bounds need at least two observations (the ball around one point is the point itself)");
    }
    if (ball.n() != samples.rows()) throw std::invalid_argument("ball size differs from sample count");
    if (!shift.empty() && shift.size() != samples.rows()) {
        throw std::invalid_argument("shift length differs from sample count");
    }
}

// Largest t in [0, 1] with (1 - t) u + t e inside the ball.
ProbabilityWeights shrink_into_ball(const std::vector<double>& e, const DivergenceBall& ball) {
    const std::size_t n = e.size();
    const double u = 1.0 / static_cast<double>(n);
    auto mix = [&](double t) {
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = (1.0 - t) * u + t * e[i];
        return ProbabilityWeights::normalized(std::move(w));
    };
    const double target = ball.threshold() * (1.0 - 1e-9);
    if (burg_statistic(mix(1.0)) <= target) return mix(1.0);
    double lo = 0.0;
    double hi = 1.0;
    for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (burg_statistic(mix(mid)) <= target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return mix(lo);
}

ProbabilityWeights restart_weights(RandomSource source, const SampleSet& samples, const DivergenceBall& ball) {
    const std::size_t n = samples.rows();
    // Draws are attached to rows by their lexicographic rank, so relabelling
    // the observations does not change which datum gets which weight.
    const std::vector<std::size_t> order = samples.canonical_order();
    std::vector<double> draws(n);
    double total = 0.0;
    for (double& d : draws) {
        d = source.exponential();
        total += d;
    }
    std::vector<double> e(n);
    for (std::size_t k = 0; k < n; ++k) e[order[k]] = draws[k] / total;
    return shrink_into_ball(e, ball);
}

} // namespace

std::vector<double> ball_value_hessian(std::span<const double> g, const DivergenceBall& ball) {
    const InnerSolution sol = max_linear_over_ball(g, ball);
    const HessianFactors f = hessian_factors(sol);
    if (!f.usable) throw std::invalid_argument("ball_value_hessian: needs nonconstant costs and a positive threshold");
    const std::size_t n = f.w.size();
    std::vector<double> h(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            double v = (f.w[i] * f.w2[k] + f.w2[i] * f.w[k] - f.S * f.w[i] * f.w[k] - f.n * f.w2[i] * f.w2[k]) *
                       f.low_rank_scale;
            if (i == k) v += f.w2[i] * f.diag_scale;
            h[i * n + k] = v;
        }
    }
    return h;
}

CutMasterResult solve_cut_master(const std::vector<std::vector<double>>& cuts,
                                 const std::vector<std::vector<double>>& constraints, const DivergenceBall& ball,
                                 std::span<const double> warm_cut_multipliers,
                                 std::span<const double> warm_constraint_multipliers) {
    const std::size_t J = cuts.size();
    const std::size_t L = constraints.size();
    const std::size_t n = ball.n();
    if (J == 0) throw std::invalid_argument("solve_cut_master: no cuts");
    for (const auto& c : cuts) {
        if (c.size() != n) throw std::invalid_argument("solve_cut_master: cut length differs from ball size");
    }
    for (const auto& a : constraints) {
        if (a.size() != n) throw std::invalid_argument("solve_cut_master: constraint length differs from ball size");
    }

    const std::size_t K = J + L;
    auto row = [&](std::size_t k) -> const std::vector<double>& { return k < J ? cuts[k] : constraints[k - J]; };
    auto sign = [&](std::size_t k) { return k < J ? 1.0 : -1.0; };

    CutMasterResult out;

    if (ball.threshold() == 0.0) {
        // The ball is the uniform point: the master is a feasibility check.
        out.weights = ProbabilityWeights::uniform(n);
        out.value = kInfinity;
        std::size_t arg = 0;
        for (std::size_t j = 0; j < J; ++j) {
            const double v = out.weights.dot(cuts[j]);
            if (v < out.value) {
                out.value = v;
                arg = j;
            }
        }
        out.violation = 0.0;
        for (const auto& a : constraints) out.violation = std::max(out.violation, out.weights.dot(a));
        if (out.violation > 1e-9) throw SolverError("solve_cut_master: constraints exclude the ball");
        out.bound = out.value;
        out.cut_multipliers.assign(J, 0.0);
        out.cut_multipliers[arg] = 1.0;
        out.constraint_multipliers.assign(L, 0.0);
        out.converged = true;
        return out;
    }

    std::vector<double> z(K, 0.0);
    double theta_sum = 0.0;
    for (std::size_t j = 0; j < J && j < warm_cut_multipliers.size(); ++j) {
        z[j] = std::max(0.0, warm_cut_multipliers[j]);
        theta_sum += z[j];
    }
    if (theta_sum > 0.0) {
        for (std::size_t j = 0; j < J; ++j) z[j] /= theta_sum;
    } else {
        for (std::size_t j = 0; j < J; ++j) z[j] = 1.0 / static_cast<double>(J);
    }
    for (std::size_t l = 0; l < L && l < warm_constraint_multipliers.size(); ++l) {
        z[J + l] = std::max(0.0, warm_constraint_multipliers[l]);
    }

    double row_scale = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        for (double v : row(k)) row_scale = std::max(row_scale, std::abs(v));
    }

    // Smoothing weight: it moves the master value by at most eps * tau, which
    // only matters when the optimal aggregated cut is nearly constant.
    const double eps = 1e-7 * (1.0 + row_scale) / std::max(1.0, ball.threshold());
    std::vector<double> gamma(n);
    auto evaluate = [&](const std::vector<double>& zz) {
        std::fill(gamma.begin(), gamma.end(), 0.0);
        for (std::size_t k = 0; k < K; ++k) {
            if (zz[k] == 0.0) continue;
            const double coef = sign(k) * zz[k];
            const auto& r = row(k);
            for (std::size_t i = 0; i < n; ++i) gamma[i] += coef * r[i];
        }
        return smoothed_ball_max(gamma, ball, eps);
    };

    std::vector<bool> free(K);
    for (std::size_t k = 0; k < K; ++k) free[k] = z[k] > 0.0;
    std::vector<double> grad(K);
    std::vector<bool> refuse_release(K, false);
    bool stalled = false;

    SmoothedMax sol = evaluate(z);
    const int max_iterations = 400;
    int it = 0;
    for (; it < max_iterations; ++it) {
        const std::span<const double> w = sol.inner.weights.values();
        for (std::size_t k = 0; k < K; ++k) grad[k] = sign(k) * dot(row(k), w);
        const double G = sol.value;
        double value = kInfinity;
        for (std::size_t j = 0; j < J; ++j) value = std::min(value, grad[j]);
        // Objective of the smoothed primal at w; G minus this is the duality gap.
        const double primal = value + eps * sol.log_term;
        double violation = 0.0;
        for (std::size_t l = 0; l < L; ++l) violation = std::max(violation, -grad[J + l]);
        const double scale = 1.0 + std::abs(G);
        if (!(G > -1e30) || std::any_of(z.begin() + static_cast<std::ptrdiff_t>(J), z.end(),
                                        [&](double e) { return e > 1e12 * (1.0 + row_scale); })) {
            throw SolverError("solve_cut_master: constraints exclude the ball");
        }
        if (G - primal <= 1e-9 * scale && violation <= 1e-9 * (1.0 + row_scale)) {
            out.converged = true;
            break;
        }

        std::vector<std::size_t> F;
        for (std::size_t k = 0; k < K; ++k) {
            if (free[k]) F.push_back(k);
        }
        const std::size_t m = F.size();
        std::size_t n_theta = 0;
        for (std::size_t k : F) n_theta += k < J ? 1 : 0;

        // Reduced Newton system on the free variables with the simplex row.
        // Off the boundary the smoothed Hessian is (diag(w^2) - w^2 (w^2)' / S) / eps.
        const HessianFactors hf = sol.on_boundary ? hessian_factors(sol.inner) : HessianFactors{};
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
        if (!sol.on_boundary) {
            std::vector<double> w2(n);
            double S = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                w2[i] = w[i] * w[i];
                S += w2[i];
            }
            std::vector<std::vector<double>> scaled(m, std::vector<double>(n));
            std::vector<double> p2(m);
            for (std::size_t a = 0; a < m; ++a) {
                const auto& r = row(F[a]);
                for (std::size_t i = 0; i < n; ++i) scaled[a][i] = sign(F[a]) * r[i];
                p2[a] = dot(scaled[a], w2);
            }
            for (std::size_t a = 0; a < m; ++a) {
                for (std::size_t b = a; b < m; ++b) {
                    double d = 0.0;
                    for (std::size_t i = 0; i < n; ++i) d += scaled[a][i] * scaled[b][i] * w2[i];
                    const double v = (d - p2[a] * p2[b] / S) / eps;
                    M(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
                    M(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
                }
            }
        } else if (hf.usable) {
            std::vector<double> p1(m), p2(m);
            std::vector<std::vector<double>> scaled(m, std::vector<double>(n));
            for (std::size_t a = 0; a < m; ++a) {
                const auto& r = row(F[a]);
                const double sg = sign(F[a]);
                for (std::size_t i = 0; i < n; ++i) scaled[a][i] = sg * r[i];
                p1[a] = dot(scaled[a], hf.w);
                p2[a] = dot(scaled[a], hf.w2);
            }
            for (std::size_t a = 0; a < m; ++a) {
                for (std::size_t b = a; b < m; ++b) {
                    double d = 0.0;
                    for (std::size_t i = 0; i < n; ++i) d += scaled[a][i] * scaled[b][i] * hf.w2[i];
                    const double v = d * hf.diag_scale + (p1[a] * p2[b] + p2[a] * p1[b] - hf.S * p1[a] * p1[b] -
                                                          hf.n * p2[a] * p2[b]) *
                                                             hf.low_rank_scale;
                    M(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
                    M(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
                }
            }
        }
        // Gradient projected onto the face (the simplex row removes the mean
        // over free cut multipliers).
        double nu = 0.0;
        for (std::size_t k : F) nu += k < J ? grad[k] : 0.0;
        nu = n_theta > 0 ? nu / static_cast<double>(n_theta) : 0.0;
        double projected = 0.0;
        for (std::size_t k : F) projected = std::max(projected, std::abs(k < J ? grad[k] - nu : grad[k]));

        // V is linear along g and along the all-ones vector, so M is only
        // semidefinite and rounding can leave it slightly indefinite. Raise the
        // ridge until the step descends; fall back to the projected gradient.
        std::vector<double> d(K, 0.0);
        double decrement = 0.0;
        bool solved = false;
        const double max_diag = m > 0 ? M.diagonal().cwiseAbs().maxCoeff() : 0.0;
        const Eigen::Index size = static_cast<Eigen::Index>(m + (n_theta > 0 ? 1 : 0));
        for (double factor : {1e-10, 1e-7, 1e-4, 1e-1}) {
            const double ridge = max_diag > 0.0 ? factor * max_diag : 1.0;
            Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(size, size);
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
            kkt.topLeftCorner(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)) = M;
            for (std::size_t a = 0; a < m; ++a) {
                const auto ia = static_cast<Eigen::Index>(a);
                kkt(ia, ia) += ridge;
                rhs(ia) = -grad[F[a]];
                if (n_theta > 0 && F[a] < J) {
                    kkt(ia, size - 1) = 1.0;
                    kkt(size - 1, ia) = 1.0;
                }
            }
            const Eigen::VectorXd sol_kkt = kkt.colPivHouseholderQr().solve(rhs);
            // A rank-deficient solve returns a short step that does not
            // satisfy the system; only an actual solution counts.
            solved = (kkt * sol_kkt - rhs).norm() <= 1e-6 * rhs.norm();
            decrement = 0.0;
            for (std::size_t a = 0; a < m; ++a) {
                d[F[a]] = sol_kkt(static_cast<Eigen::Index>(a));
                decrement -= grad[F[a]] * d[F[a]];
            }
            if (solved && decrement > -1e-14 * scale && std::isfinite(decrement)) break;
        }
        // A decrement within rounding of zero is kept; such steps are judged
        // by the projected gradient below.
        const bool newton_ok = solved && decrement > -1e-14 * scale && std::isfinite(decrement);
        if (newton_ok) decrement = std::max(decrement, 0.0);
        // Projected gradients below 1e-10 are rounding noise next to the 1e-9
        // gap tolerance; so is a step that barely moved G, unless a Newton step
        // is still shrinking a sizeable gradient.
        if (stalled || projected <= 1e-10 * scale) {
            stalled = false;
            // Stationary on the current face: free the bound variable with
            // the most negative reduced gradient.
            double most_negative = -1e-13 * scale;
            std::size_t pick = K;
            for (std::size_t k = 0; k < K; ++k) {
                if (free[k] || refuse_release[k]) continue;
                const double reduced = k < J ? grad[k] - nu : grad[k];
                if (reduced < most_negative) {
                    most_negative = reduced;
                    pick = k;
                }
            }
            if (pick == K) {
                out.converged = G - primal <= 1e-7 * scale && violation <= 1e-7 * (1.0 + row_scale);
                break;
            }
            free[pick] = true;
            continue;
        }

        // Where V is (nearly) linear on the face the Newton step carries no
        // information; the projected gradient is then followed to the first
        // bound it meets.
        auto use_gradient = [&] {
            decrement = 0.0;
            for (std::size_t k : F) {
                d[k] = -(k < J ? grad[k] - nu : grad[k]);
                decrement += d[k] * d[k];
            }
        };
        bool gradient = !newton_ok;
        if (gradient) use_gradient();

        bool accepted = false;
        bool pinned = false;
        double alpha = 0.0;
        double alpha_max = 0.0;
        std::size_t blocking = K;
        std::vector<double> trial(K);
        SmoothedMax trial_sol;
        for (int attempt = 0; attempt < 2 && !accepted && !pinned; ++attempt) {
            if (attempt == 1) {
                if (gradient) break;
                gradient = true;
                use_gradient();
            }
            // Ratio test against the nonnegativity bounds.
            alpha_max = gradient ? kInfinity : 1.0;
            blocking = K;
            for (std::size_t k : F) {
                if (d[k] < 0.0) {
                    const double ratio = z[k] / -d[k];
                    if (ratio < alpha_max) {
                        alpha_max = ratio;
                        blocking = k;
                    }
                }
            }
            if (blocking != K && z[blocking] == 0.0) {
                // A just-released variable wants to go negative; keep it at zero.
                free[blocking] = false;
                refuse_release[blocking] = true;
                pinned = true;
                break;
            }
            if (!std::isfinite(alpha_max)) alpha_max = 1.0;

            alpha = alpha_max;
            if (!gradient && decrement <= 1e-12 * scale) {
                // The predicted decrease is below the rounding of G, so the
                // full Newton step is judged by the projected gradient instead.
                for (std::size_t k = 0; k < K; ++k) trial[k] = std::max(0.0, z[k] + alpha * d[k]);
                if (blocking != K) trial[blocking] = 0.0;
                trial_sol = evaluate(trial);
                const std::span<const double> tw = trial_sol.inner.weights.values();
                std::vector<double> tg(K);
                double tnu = 0.0;
                for (std::size_t k : F) {
                    tg[k] = sign(k) * dot(row(k), tw);
                    tnu += k < J ? tg[k] : 0.0;
                }
                tnu = n_theta > 0 ? tnu / static_cast<double>(n_theta) : 0.0;
                double tprojected = 0.0;
                for (std::size_t k : F) tprojected = std::max(tprojected, std::abs(k < J ? tg[k] - tnu : tg[k]));
                if (trial_sol.value <= G + 1e-13 * scale && tprojected < projected) {
                    accepted = true;
                    break;
                }
            }
            for (int back = 0; back < 60; ++back) {
                for (std::size_t k = 0; k < K; ++k) trial[k] = std::max(0.0, z[k] + alpha * d[k]);
                if (alpha == alpha_max && blocking != K) trial[blocking] = 0.0;
                trial_sol = evaluate(trial);
                if (trial_sol.value <= G - 1e-4 * alpha * decrement) {
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
        }
        if (pinned) continue;
        stalled = accepted && G - trial_sol.value <= 1e-14 * scale && (gradient || projected <= 1e-8 * scale);
        if (!accepted) {
            out.converged = G - primal <= 1e-7 * scale && violation <= 1e-7 * (1.0 + row_scale);
            break;
        }
        if (alpha == alpha_max && blocking != K) free[blocking] = false;
        double s = 0.0;
        for (std::size_t j = 0; j < J; ++j) s += trial[j];
        for (std::size_t j = 0; j < J; ++j) trial[j] /= s;
        z = trial;
        sol = (s == 1.0) ? trial_sol : evaluate(z);
        std::fill(refuse_release.begin(), refuse_release.end(), false);
    }

    if (!out.converged && L > 0) {
        // max over the ball of -sum eta_l a_l'w below zero certifies that no
        // weight in the ball meets the constraints.
        std::fill(gamma.begin(), gamma.end(), 0.0);
        double eta_sum = 0.0;
        for (std::size_t l = 0; l < L; ++l) eta_sum += z[J + l];
        if (eta_sum > 0.0) {
            for (std::size_t l = 0; l < L; ++l) {
                for (std::size_t i = 0; i < n; ++i) gamma[i] -= z[J + l] / eta_sum * constraints[l][i];
            }
            if (max_linear_over_ball(gamma, ball).value < -1e-9 * (1.0 + row_scale)) {
                throw SolverError("solve_cut_master: constraints exclude the ball");
            }
        }
    }

    const std::span<const double> w = sol.inner.weights.values();
    // The plain value function at the final multipliers bounds the master.
    std::fill(gamma.begin(), gamma.end(), 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t i = 0; i < n; ++i) gamma[i] += sign(k) * z[k] * row(k)[i];
    }
    out.bound = max_linear_over_ball(gamma, ball).value;
    out.value = kInfinity;
    for (std::size_t j = 0; j < J; ++j) out.value = std::min(out.value, dot(cuts[j], w));
    out.violation = 0.0;
    for (const auto& a : constraints) out.violation = std::max(out.violation, dot(a, w));
    out.weights = sol.inner.weights;
    out.cut_multipliers.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(J));
    out.constraint_multipliers.assign(z.begin() + static_cast<std::ptrdiff_t>(J), z.end());
    out.iterations = it;
    return out;
}

DroSide maximize_minvalue(const StochasticProgram& program, const SampleSet& samples, const DivergenceBall& ball,
                          const DroOptions& options, std::span<const double> shift) {
    check_problem(program, samples, ball, shift);
    const SampleEvaluator eval{program, samples, shift};
    const std::size_t n = samples.rows();

    DroSide out;
    out.converged = false;
    bool have_incumbent = false;
    double best = -kInfinity;
    double upper = kInfinity;
    ProbabilityWeights w = ProbabilityWeights::uniform(n);
    ProbabilityWeights best_w = w;
    std::vector<double> best_x;
    std::vector<std::vector<double>> cuts;
    std::vector<std::vector<double>> feasibility_cuts;
    std::vector<double> theta;
    std::vector<double> eta;

    int it = 0;
    for (; it < std::max(1, options.max_cut_iterations); ++it) {
        const WeightedSaaSolution sol = solve_weighted_saa(program, samples, w);
        if (!sol.converged) {
            ++out.inner_failures;
            if (!have_incumbent) throw SolverError("inner solver did not converge at uniform weights");
            break;
        }
        if (!sol.feasible) {
            if (!have_incumbent) throw SolverError("sample problem is infeasible at uniform weights");
            std::size_t added = 0;
            for (auto& r : eval.constraint_rows(best_x)) {
                if (w.dot(r) > 0.0) {
                    feasibility_cuts.push_back(std::move(r));
                    ++added;
                }
            }
            if (added == 0) throw SolverError("could not separate weights with an infeasible inner problem");
        } else {
            std::vector<double> c = eval.costs(sol.x);
            const double value = w.dot(c);
            if (!have_incumbent || value > best) {
                best = value;
                best_w = w;
                best_x = sol.x;
                have_incumbent = true;
            }
            cuts.push_back(std::move(c));
            // A cut bounds phi only where its solution stays feasible, so the master keeps it feasible.
            for (auto& r : eval.constraint_rows(sol.x)) feasibility_cuts.push_back(std::move(r));
        }
        if (ball.threshold() == 0.0) {
            upper = best;
            out.converged = true;
            ++it;
            break;
        }
        const CutMasterResult master = solve_cut_master(cuts, feasibility_cuts, ball, theta, eta);
        theta = master.cut_multipliers;
        eta = master.constraint_multipliers;
        upper = std::min(upper, master.bound);
        if (upper - best <= options.cut_tolerance * (1.0 + std::abs(best))) {
            out.converged = true;
            ++it;
            break;
        }
        w = master.weights;
    }

    out.value = best;
    out.weights = best_w;
    out.x = best_x;
    out.iterations = it;
    out.bound = upper;
    return out;
}

namespace {

struct AlternationResult {
    bool ok = false;
    double value = kInfinity;
    ProbabilityWeights weights = ProbabilityWeights::uniform(1);
    std::vector<double> x;
    int iterations = 0;
    int inner_failures = 0;
};

AlternationResult alternate(const StochasticProgram& program, const SampleSet& samples, const DivergenceBall& ball,
                            const DroOptions& options, const SampleEvaluator& eval, ProbabilityWeights w) {
    AlternationResult out;
    WeightedSaaSolution sol = solve_weighted_saa(program, samples, w);
    if (!sol.converged) ++out.inner_failures;
    if (!sol.feasible || !sol.converged) return out;
    std::vector<double> c = eval.costs(sol.x);
    double value = w.dot(c);
    std::vector<double> x = sol.x;
    const bool constrained = program.m() > 0;

    int k = 0;
    for (; k < options.max_alternations; ++k) {
        ProbabilityWeights next_w = w;
        if (constrained) {
            std::vector<double> negated(c);
            for (double& v : negated) v = -v;
            const CutMasterResult master = solve_cut_master({negated}, eval.constraint_rows(x), ball);
            next_w = master.weights;
        } else {
            next_w = min_linear_over_ball(c, ball).weights;
        }
        const WeightedSaaSolution next = solve_weighted_saa(program, samples, next_w);
        if (!next.converged) ++out.inner_failures;
        if (!next.feasible || !next.converged) break;
        std::vector<double> next_c = eval.costs(next.x);
        const double next_value = next_w.dot(next_c);
        if (!(next_value < value)) break;
        const double improvement = value - next_value;
        w = next_w;
        c = std::move(next_c);
        x = next.x;
        value = next_value;
        if (improvement < options.alternation_tolerance * (1.0 + std::abs(value))) {
            ++k;
            break;
        }
    }
    out.ok = true;
    out.value = value;
    out.weights = w;
    out.x = std::move(x);
    out.iterations = k;
    return out;
}

} // namespace

DroSide minimize_minvalue(const StochasticProgram& program, const SampleSet& samples, const DivergenceBall& ball,
                          const DroOptions& options, std::span<const double> shift) {
    check_problem(program, samples, ball, shift);
    const SampleEvaluator eval{program, samples, shift};
    const std::size_t n = samples.rows();
    const int restarts = ball.threshold() == 0.0 ? 1 : std::max(1, options.restarts);
    const RandomSource root(options.seed);

    DroSide out;
    bool have_best = false;
    for (int r = 0; r < restarts; ++r) {
        const ProbabilityWeights start = r == 0 ? ProbabilityWeights::uniform(n)
                                                : restart_weights(root.stream(static_cast<std::uint64_t>(r)), samples, ball);
        AlternationResult res = alternate(program, samples, ball, options, eval, start);
        out.inner_failures += res.inner_failures;
        out.iterations += res.iterations;
        out.restart_values.push_back(res.ok ? res.value : kInfinity);
        if (!res.ok) {
            if (r == 0) {
                throw SolverError(res.inner_failures > 0 ? "inner solver did not converge at uniform weights"
                                                         : "sample problem is infeasible at uniform weights");
            }
            continue;
        }
        if (!have_best || res.value < out.value) {
            out.value = res.value;
            out.weights = res.weights;
            out.x = std::move(res.x);
            out.best_restart = r;
            have_best = true;
        }
    }
    out.bound = out.value;
    out.converged = true;
    return out;
}

namespace {

DroBounds combine(const DroSide& low, const DroSide& high, bool negate) {
    DroBounds b;
    const DroSide& lo_side = negate ? high : low;
    const DroSide& hi_side = negate ? low : high;
    b.lower = negate ? -high.value : low.value;
    b.upper = negate ? -low.value : high.value;
    b.lower_weights = lo_side.weights;
    b.upper_weights = hi_side.weights;
    b.lower_x = lo_side.x;
    b.upper_x = hi_side.x;
    auto& d = b.diagnostics;
    d.max_side_iterations = high.iterations;
    d.max_side_gap = high.bound - high.value;
    d.max_side_converged = high.converged;
    d.min_side_alternations = low.iterations;
    d.restarts = static_cast<int>(low.restart_values.size());
    d.restart_values = low.restart_values;
    double lo = kInfinity;
    double hi = -kInfinity;
    for (double v : low.restart_values) {
        if (!std::isfinite(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    d.restart_dispersion = hi >= lo ? hi - lo : 0.0;
    d.inner_failures = low.inner_failures + high.inner_failures;
    return b;
}

} // namespace

DroBounds dro_bounds(const StochasticProgram& program, const SampleSet& samples, const DivergenceBall& ball,
                     const DroOptions& options) {
    const DroSide high = maximize_minvalue(program, samples, ball, options);
    const DroSide low = minimize_minvalue(program, samples, ball, options);
    return combine(low, high, false);
}

DroBounds gap_bounds(const StochasticProgram& program, const SampleSet& samples, const DivergenceBall& ball,
                     std::span<const double> x_hat, const DroOptions& options) {
    program.validate();
    if (x_hat.size() != program.p()) {
        throw std::invalid_argument("gap_bounds: candidate has dimension " + std::to_string(x_hat.size()) +
                                    ", program expects " + std::to_string(program.p()));
    }
    for (const auto& g : program.deterministic_constraints) {
        if (g(x_hat) > 1e-8) throw std::invalid_argument("gap_bounds: candidate violates a deterministic constraint");
    }
    std::vector<double> shift(samples.rows());
    for (std::size_t i = 0; i < shift.size(); ++i) shift[i] = program.objective(x_hat, samples.row(i));
    // Gap over the ball: max_x sum w (H(x_hat) - H(x)) = -min_x sum w (H(x) - H(x_hat)).
    const DroSide high = maximize_minvalue(program, samples, ball, options, shift);
    const DroSide low = minimize_minvalue(program, samples, ball, options, shift);
    return combine(low, high, true);
}

} // namespace elsaa
