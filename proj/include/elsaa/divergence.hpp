#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace elsaa {

/// A point on the probability simplex over the n observations.
/// Invariants: every entry is finite and nonnegative and the entries sum to
/// one within 1e-10.
class ProbabilityWeights {
public:
    /// Validates `w`; throws std::invalid_argument when it is not a
    /// probability vector.
    explicit ProbabilityWeights(std::vector<double> w);

    static ProbabilityWeights uniform(std::size_t n);
    /// Rescales a nonnegative vector with positive sum onto the simplex.
    static ProbabilityWeights normalized(std::vector<double> w);

    std::size_t size() const noexcept { return w_.size(); }
    double operator[](std::size_t i) const { return w_[i]; }
    std::span<const double> values() const noexcept { return w_; }
    double dot(std::span<const double> c) const;

private:
    std::vector<double> w_;
};

/// Burg-entropy ball {w : -2 sum log(n w_i) <= threshold} around uniform
/// weights on n points.
class DivergenceBall {
public:
    /// Threshold is the upper-beta chi-square quantile with `df` degrees of
    /// freedom.
    static DivergenceBall calibrated(int df, double beta, std::size_t n);
    /// Uncalibrated ball with an explicit threshold (df() == 0).
    static DivergenceBall with_threshold(double threshold, std::size_t n);

    int df() const noexcept { return df_; }
    double beta() const noexcept { return beta_; }
    double threshold() const noexcept { return threshold_; }
    std::size_t n() const noexcept { return n_; }

private:
    DivergenceBall(int df, double beta, double threshold, std::size_t n)
        : df_(df), beta_(beta), threshold_(threshold), n_(n) {}

    int df_;
    double beta_;
    double threshold_;
    std::size_t n_;
};

/// Tolerance on ball membership.
inline constexpr double kBallTolerance = 1e-8;

/// -2 sum log(n w_i); +infinity when some w_i is zero.
double burg_statistic(const ProbabilityWeights& w);

struct BallMembership {
    bool inside;
    /// threshold - statistic (negative infinity for boundary weights).
    double slack;
};

/// Throws std::invalid_argument when w.size() != ball.n().
BallMembership ball_contains(const ProbabilityWeights& w, const DivergenceBall& ball);

/// sqrt(-sum log(n w_i) / (2n)): Pinsker's upper bound on the total-variation
/// distance between w and the uniform weights. Infinite when some w_i = 0.
double pinsker_tv_bound(const ProbabilityWeights& w);

/// 0.5 * sum |w_i - 1/n|.
double total_variation_from_uniform(const ProbabilityWeights& w);

} // namespace elsaa
