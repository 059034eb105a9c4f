#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "elsaa/sample_set.hpp"

namespace elsaa {

/// Seeded pseudo-random stream.
///
/// Generator: xoshiro256** (Blackman & Vigna). State s[0..3] is filled with
/// four consecutive SplitMix64 outputs of the seed, where SplitMix64 is
///   z = (x += 0x9E3779B97F4A7C15);
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
///   return z ^ (z >> 31);
/// Each draw returns rotl(s1 * 5, 7) * 9 and advances
///   t = s1 << 17; s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3; s2 ^= t; s3 = rotl(s3, 45).
///
/// Uniforms are (next >> 11) * 2^-53. Normals use Box-Muller on a pair of
/// uniforms, returning the cosine branch first and the sine branch on the
/// following call.
///
/// Independent streams come from the generator's jump polynomials:
/// `stream(k)` advances a copy by (k + 1) * 2^128 steps and `family(k)` by
/// (k + 1) * 2^192 steps, so `family(a).stream(b)` never overlaps for
/// b < 2^64.
class RandomSource {
public:
    static constexpr std::string_view algorithm = "xoshiro256**+splitmix64";

    explicit RandomSource(std::uint64_t seed = 0);

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() noexcept;
    /// Uniform on [0, 1).
    double uniform() noexcept;
    /// Uniform on (0, 1).
    double uniform_open() noexcept;
    double standard_normal() noexcept;
    double exponential() noexcept;

    RandomSource stream(std::uint64_t index) const;
    RandomSource family(std::uint64_t index) const;

    bool operator==(const RandomSource&) const = default;

private:
    void jump(std::span<const std::uint64_t, 4> poly) noexcept;

    std::uint64_t seed_;
    std::array<std::uint64_t, 4> state_{};
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

std::uint64_t splitmix64(std::uint64_t& x) noexcept;

/// n draws from N(mean, cov) through the lower Cholesky factor of cov.
/// Throws std::invalid_argument when cov is not symmetric positive
/// semidefinite (a pivot below -1e-12) or dimensions disagree.
SampleSet sample_mvnormal(RandomSource& source, std::span<const double> mean,
                          std::span<const double> cov, std::size_t n);

} // namespace elsaa
