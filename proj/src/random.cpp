#include "elsaa/random.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace elsaa {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
}

constexpr std::array<std::uint64_t, 4> kJump = {0x180ec6d33cfd0aba, 0xd5a61266f0c9392c,
                                                0xa9582618e03fc9aa, 0x39abdc4529b1661c};
constexpr std::array<std::uint64_t, 4> kLongJump = {0x76e15d3efefdcbbf, 0xc5004e441c522fb3,
                                                    0x77710069854ee241, 0x39109bb02acbe635};

} // namespace

std::uint64_t splitmix64(std::uint64_t& x) noexcept {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

RandomSource::RandomSource(std::uint64_t seed) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& s : state_) s = splitmix64(x);
}

std::uint64_t RandomSource::next_u64() noexcept {
    auto& s = state_;
    const std::uint64_t result = rotl(s[1] * 5, 7) * 9;
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
}

double RandomSource::uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomSource::uniform_open() noexcept {
    double u = 0.0;
    while (u == 0.0) u = uniform();
    return u;
}

double RandomSource::standard_normal() noexcept {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_normal_ = r * std::sin(angle);
    has_cached_normal_ = true;
    return r * std::cos(angle);
}

double RandomSource::exponential() noexcept { return -std::log(uniform_open()); }

void RandomSource::jump(std::span<const std::uint64_t, 4> poly) noexcept {
    std::array<std::uint64_t, 4> acc{};
    for (std::uint64_t word : poly) {
        for (int b = 0; b < 64; ++b) {
            if (word & (std::uint64_t{1} << b)) {
                for (int i = 0; i < 4; ++i) acc[i] ^= state_[i];
            }
            next_u64();
        }
    }
    state_ = acc;
}

RandomSource RandomSource::stream(std::uint64_t index) const {
    RandomSource out = *this;
    out.has_cached_normal_ = false;
    for (std::uint64_t k = 0; k <= index; ++k) out.jump(kJump);
    return out;
}

RandomSource RandomSource::family(std::uint64_t index) const {
    RandomSource out = *this;
    out.has_cached_normal_ = false;
    for (std::uint64_t k = 0; k <= index; ++k) out.jump(kLongJump);
    return out;
}

SampleSet sample_mvnormal(RandomSource& source, std::span<const double> mean,
                          std::span<const double> cov, std::size_t n) {
    const std::size_t d = mean.size();
    if (d == 0) throw std::invalid_argument("sample_mvnormal: empty mean");
    if (cov.size() != d * d) throw std::invalid_argument("sample_mvnormal: covariance must be d x d");
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const double a = cov[i * d + j];
            const double b = cov[j * d + i];
            if (std::abs(a - b) > 1e-12 * (1.0 + std::abs(a) + std::abs(b))) {
                throw std::invalid_argument("sample_mvnormal: covariance is not symmetric");
            }
        }
    }

    // Lower Cholesky factor; zero pivots (within -1e-12) give a singular column.
    std::vector<double> chol(d * d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        double pivot = cov[j * d + j];
        for (std::size_t k = 0; k < j; ++k) pivot -= chol[j * d + k] * chol[j * d + k];
        if (pivot < -1e-12) {
            throw std::invalid_argument("sample_mvnormal: covariance is not positive semidefinite");
        }
        const double root = pivot > 0.0 ? std::sqrt(pivot) : 0.0;
        chol[j * d + j] = root;
        for (std::size_t i = j + 1; i < d; ++i) {
            double v = cov[i * d + j];
            for (std::size_t k = 0; k < j; ++k) v -= chol[i * d + k] * chol[j * d + k];
            if (root == 0.0 && std::abs(v) > 1e-12) {
                throw std::invalid_argument("sample_mvnormal: covariance is not positive semidefinite");
            }
            chol[i * d + j] = root > 0.0 ? v / root : 0.0;
        }
    }

    SampleSet out(n, d);
    std::vector<double> z(d);
    for (std::size_t r = 0; r < n; ++r) {
        for (auto& zi : z) zi = source.standard_normal();
        auto row = out.row(r);
        for (std::size_t i = 0; i < d; ++i) {
            double v = mean[i];
            for (std::size_t k = 0; k <= i; ++k) v += chol[i * d + k] * z[k];
            row[i] = v;
        }
    }
    return out;
}

} // namespace elsaa
