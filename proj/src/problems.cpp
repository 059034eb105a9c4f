#include "elsaa/problems.hpp"

#include "elsaa/error.hpp"
#include "elsaa/lp.hpp"
#include "elsaa/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace elsaa {

void StochasticProgram::validate() const {
    if (decision_dim < 1) throw std::invalid_argument("StochasticProgram: decision dimension must be >= 1");
    if (!objective) throw std::invalid_argument("StochasticProgram: objective evaluator missing");
    for (const auto& f : stochastic_constraints) {
        if (!f) throw std::invalid_argument("StochasticProgram: empty stochastic constraint");
    }
    for (const auto& g : deterministic_constraints) {
        if (!g) throw std::invalid_argument("StochasticProgram: empty deterministic constraint");
    }
    if (solver != InnerSolverKind::generic && !weighted_solver) {
        throw std::invalid_argument("StochasticProgram: closed-form or LP program without a weighted solver");
    }
}

std::vector<double> objective_values(const StochasticProgram& program, const SampleSet& samples,
                                     std::span<const double> x) {
    std::vector<double> out(samples.rows());
    for (std::size_t i = 0; i < samples.rows(); ++i) out[i] = program.objective(x, samples.row(i));
    return out;
}

double weighted_objective(const StochasticProgram& program, const SampleSet& samples,
                          const ProbabilityWeights& w, std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < samples.rows(); ++i) {
        if (w[i] != 0.0) s += w[i] * program.objective(x, samples.row(i));
    }
    return s;
}

double weighted_constraint_violation(const StochasticProgram& program, const SampleSet& samples,
                                     const ProbabilityWeights& w, std::span<const double> x) {
    double worst = 0.0;
    for (const auto& f : program.stochastic_constraints) {
        double s = 0.0;
        for (std::size_t i = 0; i < samples.rows(); ++i) s += w[i] * f(x, samples.row(i));
        worst = std::max(worst, s);
    }
    for (const auto& g : program.deterministic_constraints) worst = std::max(worst, g(x));
    return worst;
}

double weighted_quantile(std::span<const double> values, std::span<const double> weights, double alpha) {
    if (values.size() != weights.size() || values.empty()) {
        throw std::invalid_argument("weighted_quantile: size mismatch or empty input");
    }
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    double cumulative = 0.0;
    for (std::size_t k : order) {
        cumulative += weights[k];
        if (cumulative >= alpha - 1e-12) return values[k];
    }
    return values[order.back()];
}

namespace {

void check_weights(const StochasticProgram& program, const SampleSet& samples, const ProbabilityWeights& w) {
    if (samples.rows() == 0) throw std::invalid_argument("solve_weighted_saa: empty sample set");
    if (w.size() != samples.rows()) throw std::invalid_argument("solve_weighted_saa: weight length differs from sample count");
    if (program.data_dim != 0 && samples.cols() != program.data_dim) {
        throw std::invalid_argument("solve_weighted_saa: data dimension " + std::to_string(samples.cols()) +
                                    " does not match program dimension " + std::to_string(program.data_dim));
    }
}

WeightedSaaSolution finish(const StochasticProgram& program, const SampleSet& samples,
                           const ProbabilityWeights& w, std::vector<double> x) {
    WeightedSaaSolution out;
    out.value = weighted_objective(program, samples, w, x);
    out.feasibility_residual = weighted_constraint_violation(program, samples, w, x);
    out.x = std::move(x);
    return out;
}

WeightedSaaSolution solve_quadratic(const StochasticProgram& program, const SampleSet& samples,
                                    const ProbabilityWeights& w) {
    double mean = 0.0;
    for (std::size_t i = 0; i < samples.rows(); ++i) mean += w[i] * samples(i, 0);
    return finish(program, samples, w, {mean});
}

WeightedSaaSolution solve_cvar(double alpha, const StochasticProgram& program, const SampleSet& samples,
                               const ProbabilityWeights& w) {
    std::vector<double> column(samples.rows());
    for (std::size_t i = 0; i < samples.rows(); ++i) column[i] = samples(i, 0);
    const double q = weighted_quantile(column, w.values(), alpha);
    return finish(program, samples, w, {q});
}

WeightedSaaSolution solve_portfolio(double alpha, double r_b, const StochasticProgram& program,
                                    const SampleSet& samples, const ProbabilityWeights& w) {
    const std::size_t n = samples.rows();
    const std::size_t d = samples.cols();
    // Variables: x (d), c (free), u (n) with u_i >= -xi_i'x - c, u_i >= 0.
    const std::size_t nv = d + 1 + n;
    LinearProgram lp;
    lp.objective.assign(nv, 0.0);
    lp.objective[d] = 1.0;
    for (std::size_t i = 0; i < n; ++i) lp.objective[d + 1 + i] = w[i] / (1.0 - alpha);
    lp.lower.assign(nv, 0.0);
    lp.upper.assign(nv, kInf);
    lp.lower[d] = -kInf;

    lp.inequality_rows.reserve(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(nv, 0.0);
        for (std::size_t j = 0; j < d; ++j) row[j] = -samples(i, j);
        row[d] = -1.0;
        row[d + 1 + i] = -1.0;
        lp.inequality_rows.push_back(std::move(row));
        lp.inequality_rhs.push_back(0.0);
    }
    std::vector<double> ret(nv, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) ret[j] -= w[i] * samples(i, j);
    }
    lp.inequality_rows.push_back(std::move(ret));
    lp.inequality_rhs.push_back(-r_b);

    std::vector<double> budget(nv, 0.0);
    for (std::size_t j = 0; j < d; ++j) budget[j] = 1.0;
    lp.equality_rows.push_back(std::move(budget));
    lp.equality_rhs.push_back(1.0);

    const LpResult res = solve_lp(lp);
    if (res.status != LpStatus::optimal) {
        WeightedSaaSolution out;
        out.feasible = false;
        out.value = std::numeric_limits<double>::infinity();
        return out;
    }
    std::vector<double> x(res.x.begin(), res.x.begin() + static_cast<std::ptrdiff_t>(d + 1));
    // Clean round-off so the deterministic constraints hold to machine precision.
    double total = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        x[j] = std::max(0.0, x[j]);
        total += x[j];
    }
    for (std::size_t j = 0; j < d; ++j) x[j] /= total;
    return finish(program, samples, w, std::move(x));
}

double central_difference(const std::function<double(std::span<const double>)>& f, std::vector<double>& x,
                          std::size_t j) {
    const double h = 1e-6 * (1.0 + std::abs(x[j]));
    const double saved = x[j];
    x[j] = saved + h;
    const double up = f(x);
    x[j] = saved - h;
    const double down = f(x);
    x[j] = saved;
    return (up - down) / (2.0 * h);
}

WeightedSaaSolution solve_generic(const StochasticProgram& program, const SampleSet& samples,
                                  const ProbabilityWeights& w) {
    const auto& cfg = program.generic;
    const std::size_t p = program.p();
    std::vector<double> lower = cfg.lower.empty() ? std::vector<double>(p, -kInf) : cfg.lower;
    std::vector<double> upper = cfg.upper.empty() ? std::vector<double>(p, kInf) : cfg.upper;
    std::vector<double> start = cfg.start.empty() ? std::vector<double>(p, 0.0) : cfg.start;
    if (lower.size() != p || upper.size() != p || start.size() != p) {
        throw std::invalid_argument("generic solver: bound/start length differs from decision dimension");
    }
    auto project = [&](std::vector<double>& x) {
        for (std::size_t j = 0; j < p; ++j) x[j] = std::clamp(x[j], lower[j], upper[j]);
    };

    auto objective = [&](std::span<const double> x) { return weighted_objective(program, samples, w, x); };
    std::vector<std::function<double(std::span<const double>)>> constraints;
    for (const auto& f : program.stochastic_constraints) {
        constraints.emplace_back([&, f](std::span<const double> x) {
            double s = 0.0;
            for (std::size_t i = 0; i < samples.rows(); ++i) s += w[i] * f(x, samples.row(i));
            return s;
        });
    }
    for (const auto& g : program.deterministic_constraints) constraints.emplace_back(g);

    auto subgradient = [&](std::vector<double>& x, std::vector<double>& grad) {
        std::fill(grad.begin(), grad.end(), 0.0);
        if (cfg.objective_gradient) {
            std::vector<double> gi(p);
            for (std::size_t i = 0; i < samples.rows(); ++i) {
                cfg.objective_gradient(x, samples.row(i), gi);
                for (std::size_t j = 0; j < p; ++j) grad[j] += w[i] * gi[j];
            }
        } else {
            for (std::size_t j = 0; j < p; ++j) grad[j] = central_difference(objective, x, j);
        }
        for (const auto& c : constraints) {
            if (c(x) <= 0.0) continue;
            for (std::size_t j = 0; j < p; ++j) grad[j] += cfg.penalty * central_difference(c, x, j);
        }
    };

    RandomSource rng(cfg.seed);
    WeightedSaaSolution best;
    best.feasible = false;
    best.converged = false;
    best.value = std::numeric_limits<double>::infinity();
    std::vector<double> grad(p);
    for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
        std::vector<double> x = start;
        if (r > 0) {
            for (std::size_t j = 0; j < p; ++j) {
                if (std::isfinite(lower[j]) && std::isfinite(upper[j])) {
                    x[j] = lower[j] + rng.uniform() * (upper[j] - lower[j]);
                } else {
                    x[j] = start[j] + rng.standard_normal() * (1.0 + std::abs(start[j]));
                }
            }
        }
        project(x);
        for (int k = 0; k < cfg.iterations; ++k) {
            const double violation = weighted_constraint_violation(program, samples, w, x);
            if (violation <= 1e-8) {
                const double value = objective(x);
                if (value < best.value) {
                    best.value = value;
                    best.x = x;
                    best.feasible = true;
                    best.converged = true;
                    best.feasibility_residual = std::max(0.0, violation);
                }
            }
            subgradient(x, grad);
            double norm = 0.0;
            for (double g : grad) norm += g * g;
            norm = std::sqrt(norm);
            if (norm == 0.0) break;
            const double step = cfg.step_scale / (k + cfg.step_offset);
            for (std::size_t j = 0; j < p; ++j) x[j] -= step * grad[j] / norm;
            project(x);
        }
    }
    return best;
}

} // namespace

WeightedSaaSolution solve_weighted_saa(const StochasticProgram& program, const SampleSet& samples,
                                       const ProbabilityWeights& w) {
    check_weights(program, samples, w);
    if (program.solver == InnerSolverKind::generic) return solve_generic(program, samples, w);
    if (!program.weighted_solver) throw std::invalid_argument("solve_weighted_saa: program has no weighted solver");
    return program.weighted_solver(program, samples, w);
}

WeightedSaaSolution solve_saa(const StochasticProgram& program, const SampleSet& samples) {
    return solve_weighted_saa(program, samples, ProbabilityWeights::uniform(samples.rows()));
}

StochasticProgram quadratic_problem() {
    StochasticProgram prog;
    prog.name = "quadratic";
    prog.decision_dim = 1;
    prog.data_dim = 1;
    prog.objective = [](std::span<const double> x, std::span<const double> xi) {
        const double r = x[0] - xi[0];
        return r * r;
    };
    prog.solver = InnerSolverKind::closed_form;
    prog.weighted_solver = [](const StochasticProgram& p, const SampleSet& s, const ProbabilityWeights& w) {
        return solve_quadratic(p, s, w);
    };
    return prog;
}

StochasticProgram cvar_problem(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("cvar_problem: alpha must lie in (0, 1)");
    StochasticProgram prog;
    prog.name = "cvar";
    prog.decision_dim = 1;
    prog.data_dim = 1;
    prog.objective = [alpha](std::span<const double> x, std::span<const double> xi) {
        return x[0] + std::max(xi[0] - x[0], 0.0) / (1.0 - alpha);
    };
    prog.solver = InnerSolverKind::closed_form;
    prog.weighted_solver = [alpha](const StochasticProgram& p, const SampleSet& s, const ProbabilityWeights& w) {
        return solve_cvar(alpha, p, s, w);
    };
    return prog;
}

StochasticProgram portfolio_problem(double alpha, double r_b, std::size_t assets) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("portfolio_problem: alpha must lie in (0, 1)");
    if (assets < 1) throw std::invalid_argument("portfolio_problem: need at least one asset");
    StochasticProgram prog;
    prog.name = "portfolio";
    prog.decision_dim = assets + 1;
    prog.data_dim = assets;
    prog.objective = [alpha, assets](std::span<const double> x, std::span<const double> xi) {
        double ret = 0.0;
        for (std::size_t j = 0; j < assets; ++j) ret += xi[j] * x[j];
        const double c = x[assets];
        return c + std::max(-ret - c, 0.0) / (1.0 - alpha);
    };
    prog.stochastic_constraints.push_back([r_b, assets](std::span<const double> x, std::span<const double> xi) {
        double ret = 0.0;
        for (std::size_t j = 0; j < assets; ++j) ret += xi[j] * x[j];
        return r_b - ret;
    });
    prog.deterministic_constraints.push_back([assets](std::span<const double> x) {
        double s = 0.0;
        for (std::size_t j = 0; j < assets; ++j) s += x[j];
        return s - 1.0;
    });
    prog.deterministic_constraints.push_back([assets](std::span<const double> x) {
        double s = 0.0;
        for (std::size_t j = 0; j < assets; ++j) s += x[j];
        return 1.0 - s;
    });
    for (std::size_t j = 0; j < assets; ++j) {
        prog.deterministic_constraints.push_back([j](std::span<const double> x) { return -x[j]; });
    }
    prog.solver = InnerSolverKind::lp_reducible;
    prog.weighted_solver = [alpha, r_b](const StochasticProgram& p, const SampleSet& s,
                                        const ProbabilityWeights& w) {
        return solve_portfolio(alpha, r_b, p, s, w);
    };
    return prog;
}

std::string to_string(ProblemKind kind) {
    switch (kind) {
    case ProblemKind::quadratic: return "quadratic";
    case ProblemKind::cvar: return "cvar";
    case ProblemKind::portfolio: return "portfolio";
    }
    return "unknown";
}

ProblemKind problem_kind_from_string(const std::string& name) {
    if (name == "quadratic") return ProblemKind::quadratic;
    if (name == "cvar") return ProblemKind::cvar;
    if (name == "portfolio") return ProblemKind::portfolio;
    throw std::invalid_argument("unknown problem '" + name + "' (expected quadratic, cvar or portfolio)");
}

ProblemSpec default_problem_spec(ProblemKind kind) {
    ProblemSpec spec;
    spec.kind = kind;
    spec.alpha = 0.9;
    if (kind == ProblemKind::portfolio) {
        spec.r_b = 1.0;
        spec.dimension = 2;
        spec.mean = {0.8, 1.2};
        spec.cov = {1.0, 0.0, 0.0, 4.0};
    } else {
        spec.dimension = 1;
        spec.mean = {0.0};
        spec.cov = {1.0};
    }
    return spec;
}

std::vector<std::string> problem_spec_errors(const ProblemSpec& spec) {
    std::vector<std::string> errors;
    if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) errors.push_back("alpha must lie in (0, 1)");
    if (spec.kind != ProblemKind::portfolio && spec.dimension != 1) {
        errors.push_back(to_string(spec.kind) + " problem needs dimension 1");
    }
    if (spec.dimension < 1) errors.push_back("dimension must be >= 1");
    if (!std::isfinite(spec.r_b)) errors.push_back("r_b must be finite");
    if (spec.mean.size() != spec.dimension) {
        errors.push_back("mean has " + std::to_string(spec.mean.size()) + " entries, dimension is " +
                         std::to_string(spec.dimension));
    }
    if (spec.cov.size() != spec.dimension * spec.dimension) {
        errors.push_back("cov has " + std::to_string(spec.cov.size()) + " entries, expected " +
                         std::to_string(spec.dimension * spec.dimension));
    } else {
        const std::size_t d = spec.dimension;
        for (std::size_t i = 0; i < d; ++i) {
            if (!(spec.cov[i * d + i] >= 0.0)) errors.push_back("cov has a negative diagonal entry");
            for (std::size_t j = 0; j < i; ++j) {
                if (std::abs(spec.cov[i * d + j] - spec.cov[j * d + i]) > 1e-12) {
                    errors.push_back("cov is not symmetric");
                    i = d;
                    break;
                }
            }
        }
    }
    for (double v : spec.mean) {
        if (!std::isfinite(v)) {
            errors.push_back("mean has a non-finite entry");
            break;
        }
    }
    return errors;
}

StochasticProgram make_program(const ProblemSpec& spec) {
    const auto errors = problem_spec_errors(spec);
    if (!errors.empty()) {
        std::string msg = "invalid problem spec: " + errors.front();
        for (std::size_t k = 1; k < errors.size(); ++k) msg += "; " + errors[k];
        throw std::invalid_argument(msg);
    }
    switch (spec.kind) {
    case ProblemKind::quadratic: return quadratic_problem();
    case ProblemKind::cvar: return cvar_problem(spec.alpha);
    case ProblemKind::portfolio: return portfolio_problem(spec.alpha, spec.r_b, spec.dimension);
    }
    throw std::invalid_argument("make_program: unknown problem kind");
}

} // namespace elsaa
